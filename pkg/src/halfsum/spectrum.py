"""Kernel transforms, zero detection, and the nonvanishing classifier.

The transform of an additive kernel is the Fourier transform of its zero
extension; for a multiplicative kernel it is the character transform
``int_1^inf psi(t) t^{-ix} dt/t``, which equals the Fourier transform of the
log-transported kernel.  A kernel whose transform never vanishes on the real
line defines a method equivalent to the weakest (translation) method, so the
classifier's job is to either certify a window free of zeros or to locate a
zero.

Certification is honest about its limits: analytic nonvanishing proofs exist
only for the exponential / power-law families; everything else gets a window
certificate from a Lipschitz bound (the kernel's first absolute moment), or
``inconclusive`` when no bound is available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT, Settings
from .errors import FlavorMismatch, InvalidArgument, TransformFailed, QuadratureFailed
from .exppoly import ExpPoly
from .kernels import ClosedForm, Flavor, Kernel, Sampled, to_additive
from .quadrature import fourier_piecewise_linear, integrate_adaptive


@dataclass(frozen=True)
class Verdict:
    kind: str  # "nonvanishing_on_window" | "zero_found" | "inconclusive"
    margin: Optional[float] = None
    zero_at: Optional[float] = None
    zero_modulus: Optional[float] = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.margin is not None:
            out["margin"] = self.margin
        if self.zero_at is not None:
            out["zero_at"] = self.zero_at
            out["zero_modulus"] = self.zero_modulus
        return out


@dataclass
class SpectrumProfile:
    frequencies: np.ndarray
    values: np.ndarray
    min_modulus: float
    lipschitz_bound: Optional[float]
    verdict: Verdict
    analytic: Optional[str] = None


# ---------------------------------------------------------------------------
# transforms

def _additive(kernel: Kernel) -> Kernel:
    return kernel if kernel.flavor is Flavor.ADDITIVE else to_additive(kernel)


def transform_grid(kernel: Kernel, xi: np.ndarray) -> np.ndarray:
    """Transform values on a frequency grid (analytic for closed forms)."""
    k = _additive(kernel)
    form = k.additive_form()
    if form is not None:
        return form.transform(xi)
    body = k.body
    out = np.empty(xi.shape, dtype=complex)
    for i, x in enumerate(xi):
        out[i] = _sampled_transform(body, float(x))
    return out


def _sampled_transform(body: Sampled, xi: float) -> complex:
    val = fourier_piecewise_linear(body.grid, body.values, xi)
    if body.tail_rate > 0:
        u0 = body.grid[-1]
        val += body.tail_value * np.exp(-1j * xi * u0) / (body.tail_rate + 1j * xi)
    return val


def fourier_transform(kernel: Kernel, xi: float) -> complex:
    """Transform of the zero-extended additive kernel at frequency xi."""
    if kernel.flavor is not Flavor.ADDITIVE:
        raise FlavorMismatch("fourier_transform expects an additive kernel")
    form = kernel.additive_form()
    if form is not None:
        return form.transform(float(xi))
    return _sampled_transform(kernel.body, float(xi))


def mellin_transform(kernel: Kernel, x: float) -> complex:
    """Multiplicative character transform int_1^inf psi(t) t^{-ix} dt/t."""
    if kernel.flavor is not Flavor.MULTIPLICATIVE:
        raise FlavorMismatch("mellin_transform expects a multiplicative kernel")
    return fourier_transform(to_additive(kernel), x)


def transform_numeric(kernel: Kernel, xi, settings: Settings = DEFAULT,
                      tol: Optional[float] = None) -> np.ndarray:
    """Transform by direct quadrature, bypassing closed forms.

    The independent route used to cross-check the analytic formulas.
    """
    k = _additive(kernel)
    form = k.additive_form()
    tol = tol if tol is not None else settings.tol_quad
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if form is not None:
        cut = form.support_cutoff(0.1 * tol)
        out = np.empty(xi.shape, dtype=complex)
        for i, x in enumerate(xi):
            try:
                out[i] = integrate_adaptive(
                    lambda u, x=x: form(u) * np.exp(-1j * x * u), 0.0, cut, tol,
                    order=16, max_evals=settings.max_evals)
            except QuadratureFailed as exc:
                raise TransformFailed(f"transform quadrature failed at xi={x}: {exc}") from exc
        return out
    return np.array([_sampled_transform(k.body, float(x)) for x in xi])


# ---------------------------------------------------------------------------
# classification

_ANALYTIC_NONVANISHING = {
    # |rate/(rate + i xi)| = rate / sqrt(rate^2 + xi^2) > 0 everywhere
    "exponential": lambda params, width: params["rate"] / np.hypot(params["rate"], width),
    "power_law": lambda params, width: params["r"] / np.hypot(params["r"], width),
}


def _require_normalized(kernel: Kernel, settings: Settings):
    if abs(kernel.mass() - 1.0) > 100 * settings.tol_quad:
        raise InvalidArgument("classify_wiener expects a normalized kernel")


def _refine_minimum(modfn, lo: float, hi: float, iters: int):
    """Interval-halving refinement of a bracketed minimum of |transform|."""
    for _ in range(iters):
        third = (hi - lo) / 3.0
        m1, m2 = lo + third, hi - third
        if modfn(m1) <= modfn(m2):
            hi = m2
        else:
            lo = m1
    mid = 0.5 * (lo + hi)
    return mid, modfn(mid)


def classify_wiener(kernel: Kernel, settings: Settings = DEFAULT,
                    n_points: int = 1001) -> SpectrumProfile:
    """Zero-set verdict for the kernel transform on [-freq_window, freq_window]."""
    _require_normalized(kernel, settings)
    width = settings.freq_window
    xi = np.linspace(-width, width, n_points)
    values = transform_grid(kernel, xi)
    mods = np.abs(values)
    min_mod = float(mods.min())
    lip = kernel.first_moment()

    body = kernel.body
    if isinstance(body, ClosedForm) and body.catalog_id in _ANALYTIC_NONVANISHING:
        margin = float(_ANALYTIC_NONVANISHING[body.catalog_id](body.params, width))
        return SpectrumProfile(xi, values, min_mod, lip,
                               Verdict("nonvanishing_on_window", margin=margin),
                               analytic=body.catalog_id)

    modfn = lambda x: abs(complex(transform_grid(kernel, np.array([x]))[0]))

    # try to pin down a zero near the grid minimum first
    i0 = int(np.argmin(mods))
    step = xi[1] - xi[0]
    lo = xi[max(0, i0 - 1)]
    hi = xi[min(n_points - 1, i0 + 1)]
    zero_at, zero_mod = _refine_minimum(modfn, lo, hi, settings.refine_max_iter)
    if zero_mod < settings.zero_epsilon:
        return SpectrumProfile(xi, values, min_mod, lip,
                               Verdict("zero_found", zero_at=float(zero_at),
                                       zero_modulus=float(zero_mod)))

    if lip is None or lip <= 0:
        # no Lipschitz certificate possible; never claim nonvanishing
        return SpectrumProfile(xi, values, min_mod, lip, Verdict("inconclusive"))

    for _ in range(settings.grid_pass_limit):
        margin = min_mod - lip * step / 2.0
        if margin > 0:
            return SpectrumProfile(xi, values, min_mod, lip,
                                   Verdict("nonvanishing_on_window", margin=float(margin)))
        wanted = min_mod / (2.0 * lip)
        n_new = int(min(200_001, np.ceil(2 * width / max(wanted, 1e-9)) + 1))
        if n_new <= xi.size:
            break
        xi = np.linspace(-width, width, n_new)
        values = transform_grid(kernel, xi)
        mods = np.abs(values)
        min_mod = float(mods.min())
        step = xi[1] - xi[0]
    margin = min_mod - lip * step / 2.0
    if margin > 0:
        return SpectrumProfile(xi, values, min_mod, lip,
                               Verdict("nonvanishing_on_window", margin=float(margin)))
    return SpectrumProfile(xi, values, min_mod, lip, Verdict("inconclusive"))


# ---------------------------------------------------------------------------
# dual reflection identity

@dataclass
class ReflectionReport:
    frequencies: np.ndarray
    reflected: np.ndarray   # transform of the reflected kernel, by quadrature
    expected: np.ndarray    # kernel transform at -xi
    max_deviation: float


def dual_transform_identity_check(kernel: Kernel, settings: Settings = DEFAULT,
                                  n_points: int = 81) -> ReflectionReport:
    """Check that reflecting the kernel flips the sign of the frequency.

    The reflected kernel lives on the negative half-line; its transform is
    computed by independent quadrature and compared against the original
    transform evaluated at -xi.
    """
    if kernel.flavor is not Flavor.ADDITIVE:
        raise FlavorMismatch("dual_transform_identity_check expects an additive kernel")
    xi = np.linspace(-settings.freq_window, settings.freq_window, n_points)
    # int_-inf^0 phi(-s) e^{-i xi s} ds  =  int_0^inf phi(t) e^{+i xi t} dt
    form = kernel.additive_form()
    lhs = np.empty(xi.shape, dtype=complex)
    if form is not None:
        cut = form.support_cutoff(0.1 * settings.tol_quad)
        for i, x in enumerate(xi):
            lhs[i] = integrate_adaptive(
                lambda u, x=x: form(u) * np.exp(1j * x * u), 0.0, cut,
                settings.tol_quad, order=16)
    else:
        for i, x in enumerate(xi):
            lhs[i] = np.conj(_sampled_transform(
                Sampled(kernel.body.grid, np.conj(kernel.body.values),
                        np.conj(kernel.body.tail_value), kernel.body.tail_rate),
                float(x)))
    rhs = transform_grid(kernel, -xi)
    dev = float(np.max(np.abs(lhs - rhs)))
    return ReflectionReport(xi, lhs, rhs, dev)
