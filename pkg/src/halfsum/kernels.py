"""Kernels of both group flavors and their algebra.

An additive kernel is an integrable weight on [0, inf) under Lebesgue
measure; a multiplicative kernel lives on [1, inf) under dt/t.  The log
substitution u = log t identifies the multiplicative algebra with the
additive one, so internally every closed-form kernel is stored as an
:class:`~halfsum.exppoly.ExpPoly` in additive coordinates and the flavor
only controls how abscissae are interpreted.

Closed-form catalog:

* ``exponential(rate)`` — additive, rate * exp(-rate * x)
* ``power_law(r)`` — multiplicative, r * t**(-r)
* ``counterexample_additive(alpha)`` — additive, unit mass with a transform
  zero placed exactly at frequency alpha
* ``counterexample_multiplicative(alpha)`` — multiplicative analogue
* ``finite_mixture`` — complex linear combination of catalog entries
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .config import DEFAULT, Settings
from .errors import (ConfigError, DegenerateKernel, FlavorMismatch,
                     InvalidArgument, InvalidKernel)
from .exppoly import ExpPoly, Term
from .quadrature import integrate_adaptive


class Flavor(enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class ClosedForm:
    catalog_id: str
    params: dict
    form: ExpPoly  # additive coordinates (u = log t for multiplicative kernels)


@dataclass(frozen=True)
class Sampled:
    """Grid samples in additive coordinates plus a geometric tail model.

    ``grid`` is uniform in additive coordinates; the kernel beyond the grid is
    modeled as ``tail_value * exp(-tail_rate * (u - grid[-1]))``.  When the
    samples came from an exact convolution of closed forms the generating
    expression is kept in ``exact`` for high-precision downstream use.
    """

    grid: np.ndarray
    values: np.ndarray
    tail_value: complex
    tail_rate: float
    exact: Optional[ExpPoly] = field(default=None, compare=False)


@dataclass(frozen=True)
class Kernel:
    flavor: Flavor
    body: object  # ClosedForm | Sampled
    meta: dict = field(default_factory=dict, compare=False)

    # ---- cached scalars --------------------------------------------------

    def mass(self) -> complex:
        if isinstance(self.body, ClosedForm):
            return self.body.form.mass()
        b = self.body
        if b.exact is not None:
            return b.exact.mass()
        m = complex(np.trapezoid(b.values, b.grid))
        if b.tail_rate > 0:
            m += b.tail_value / b.tail_rate
        return m

    def l1_norm(self) -> float:
        key = "_l1"
        if key not in self.meta:
            self.meta[key] = self._abs_moment(0)
        return self.meta[key]

    def first_moment(self) -> Optional[float]:
        """int u |phi(u)| du in additive coordinates; None when unavailable."""
        key = "_m1"
        if key not in self.meta:
            try:
                self.meta[key] = self._abs_moment(1)
            except Exception:
                self.meta[key] = None
        return self.meta[key]

    def _abs_moment(self, k: int) -> float:
        if isinstance(self.body, ClosedForm):
            form = self.body.form
            cut = form.support_cutoff(1e-14)
            val = integrate_adaptive(lambda u: (u ** k) * np.abs(form(u)),
                                     0.0, cut, 1e-12, order=16)
            return float(val.real)
        b = self.body
        val = float(np.trapezoid(b.grid ** k * np.abs(b.values), b.grid))
        if b.tail_rate > 0:
            g = b.tail_rate
            u0 = b.grid[-1]
            if k == 0:
                val += abs(b.tail_value) / g
            else:
                val += abs(b.tail_value) * (u0 / g + 1.0 / g ** 2)
        return val

    # ---- coordinate helpers ---------------------------------------------

    def additive_form(self) -> Optional[ExpPoly]:
        """Closed-form additive-coordinates representation, if one exists."""
        if isinstance(self.body, ClosedForm):
            return self.body.form
        if self.body.exact is not None:
            return self.body.exact
        return None

    def support_origin(self) -> float:
        return 0.0 if self.flavor is Flavor.ADDITIVE else 1.0


# ---------------------------------------------------------------------------
# evaluation

def evaluate(kernel: Kernel, t):
    """Pointwise kernel value; zero outside the support half-line."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if not np.all(np.isfinite(t)):
        raise InvalidKernel("evaluation point must be finite")
    out = np.zeros(t.shape, dtype=complex)
    if kernel.flavor is Flavor.ADDITIVE:
        inside = t >= 0
        u = t[inside]
    else:
        inside = t >= 1
        u = np.log(t[inside])
    body = kernel.body
    if isinstance(body, ClosedForm):
        out[inside] = body.form(u)
    elif body.exact is not None:
        out[inside] = body.exact(u)
    else:
        out[inside] = _sampled_eval(body, u)
    return complex(out[0]) if scalar else out


def _sampled_eval(body: Sampled, u: np.ndarray) -> np.ndarray:
    out = np.empty(u.shape, dtype=complex)
    out.real = np.interp(u, body.grid, body.values.real, left=0.0, right=0.0)
    out.imag = np.interp(u, body.grid, body.values.imag, left=0.0, right=0.0)
    beyond = u > body.grid[-1]
    if beyond.any() and body.tail_rate > 0:
        out[beyond] = body.tail_value * np.exp(-body.tail_rate * (u[beyond] - body.grid[-1]))
    return out


# ---------------------------------------------------------------------------
# catalog constructors

def _check_param(name, value):
    v = float(value) if not isinstance(value, complex) else value
    if not np.isfinite(v):
        raise InvalidKernel(f"parameter {name} must be finite, got {value!r}")
    return v


def exponential(rate: float) -> Kernel:
    rate = _check_param("rate", rate)
    if rate <= 0:
        raise InvalidKernel("exponential rate must be positive")
    form = ExpPoly([Term(rate, 0, -rate)])
    return Kernel(Flavor.ADDITIVE, ClosedForm("exponential", {"rate": rate}, form))


def power_law(r: float) -> Kernel:
    r = _check_param("r", r)
    if r <= 0:
        raise InvalidKernel("power_law exponent must be positive")
    # r * t**-r on [1, inf) under dt/t; in u = log t this is r * exp(-r u)
    form = ExpPoly([Term(r, 0, -r)])
    return Kernel(Flavor.MULTIPLICATIVE, ClosedForm("power_law", {"r": r}, form))


def _counterexample_form(alpha: float) -> ExpPoly:
    # prefactor (1 + alpha^2)/alpha^2 makes the mass exactly 1, and the
    # transform  C * [1/(1+i xi) - (1/(1+i alpha)) / (1 + i(xi - alpha))]
    # vanishes exactly at xi = alpha.
    alpha = _check_param("alpha", alpha)
    if alpha == 0:
        raise InvalidKernel("counterexample kernels need a nonzero frequency")
    c = (1.0 + alpha * alpha) / (alpha * alpha)
    return ExpPoly([
        Term(c, 0, -1.0 + 0j),
        Term(-c / (1.0 + 1j * alpha), 0, -1.0 + 1j * alpha),
    ])


def counterexample_additive(alpha: float) -> Kernel:
    form = _counterexample_form(alpha)
    return Kernel(Flavor.ADDITIVE,
                  ClosedForm("counterexample_additive", {"alpha": float(alpha)}, form))


def counterexample_multiplicative(alpha: float) -> Kernel:
    form = _counterexample_form(alpha)
    return Kernel(Flavor.MULTIPLICATIVE,
                  ClosedForm("counterexample_multiplicative", {"alpha": float(alpha)}, form))


def finite_mixture(components, flavor: Flavor) -> Kernel:
    """Complex linear combination [(coef, kernel), ...] of same-flavor entries."""
    if not components:
        raise InvalidArgument("finite_mixture needs at least one component")
    form = ExpPoly([])
    specs = []
    for coef, kern in components:
        coef = complex(coef)
        if not np.isfinite(coef):
            raise InvalidKernel("mixture coefficient must be finite")
        if kern.flavor is not flavor:
            raise FlavorMismatch("mixture components must share the mixture flavor")
        inner = kern.additive_form()
        if inner is None:
            raise InvalidKernel("finite_mixture components must be closed-form")
        form = form + inner.scaled(coef)
        specs.append({"coef": [coef.real, coef.imag],
                      "catalog": getattr(kern.body, "catalog_id", "?"),
                      "params": dict(getattr(kern.body, "params", {}))})
    return Kernel(flavor, ClosedForm("finite_mixture", {"components": specs}, form))


def sampled_kernel(abscissae, values, flavor: Flavor,
                   settings: Settings = DEFAULT) -> Kernel:
    """Build a kernel from grid samples in native coordinates."""
    t = np.asarray(abscissae, dtype=float)
    v = np.asarray(values, dtype=complex)
    if t.size < 4 or t.size != v.size:
        raise InvalidKernel("sampled kernel needs at least 4 matching samples")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise InvalidKernel("sampled kernel has non-finite entries")
    if np.any(np.diff(t) <= 0):
        raise InvalidKernel("sampled kernel abscissae must be strictly increasing")
    if flavor is Flavor.MULTIPLICATIVE:
        if t[0] < 1.0:
            raise InvalidKernel("multiplicative samples must start at t >= 1")
        u = np.log(t)
    else:
        if t[0] < 0.0:
            raise InvalidKernel("additive samples must start at t >= 0")
        u = t
    # resample to a uniform grid in additive coordinates
    n = max(512, 4 * u.size)
    grid = np.linspace(u[0], u[-1], n)
    vals = np.empty(n, dtype=complex)
    vals.real = np.interp(grid, u, v.real)
    vals.imag = np.interp(grid, u, v.imag)
    if u[0] > 0:
        lead = np.arange(0.0, u[0], grid[1] - grid[0]) if u[0] > (grid[1] - grid[0]) else np.array([0.0])
        grid = np.concatenate([lead, grid])
        vals = np.concatenate([np.zeros(lead.size, dtype=complex), vals])
    tail_value, tail_rate = _fit_tail(grid, vals)
    return Kernel(flavor, Sampled(grid, vals, tail_value, tail_rate))


def _fit_tail(grid: np.ndarray, values: np.ndarray):
    """Least-squares geometric decay through the last 10% of samples."""
    n = max(4, grid.size // 10)
    u = grid[-n:]
    mag = np.abs(values[-n:])
    good = mag > 1e-300
    if good.sum() < 3:
        return 0.0 + 0.0j, 0.0
    slope, icept = np.polyfit(u[good], np.log(mag[good]), 1)
    if slope >= -1e-12:
        raise InvalidKernel("sampled kernel tail does not decay; cannot certify integrability")
    rate = -slope
    return complex(values[-1]), float(rate)


# ---------------------------------------------------------------------------
# algebra

def normalize(kernel: Kernel, settings: Settings = DEFAULT) -> Kernel:
    m = kernel.mass()
    if abs(m) < settings.mass_epsilon:
        raise DegenerateKernel(f"kernel mass {m!r} below mass_epsilon")
    if abs(m - 1.0) <= settings.tol_quad:
        return kernel
    scale = 1.0 / m
    meta = dict(kernel.meta)
    meta["normalization_scale"] = scale
    body = kernel.body
    if isinstance(body, ClosedForm):
        new = ClosedForm(body.catalog_id, dict(body.params), body.form.scaled(scale))
    else:
        new = Sampled(body.grid, body.values * scale, body.tail_value * scale,
                      body.tail_rate,
                      None if body.exact is None else body.exact.scaled(scale))
    return Kernel(kernel.flavor, new, meta)


def _to_sampled_body(kernel: Kernel, grid: np.ndarray) -> np.ndarray:
    """Kernel values on a uniform additive-coordinates grid."""
    body = kernel.body
    if isinstance(body, ClosedForm):
        return body.form(grid)
    vals = np.empty(grid.size, dtype=complex)
    vals.real = np.interp(grid, body.grid, body.values.real, left=0.0, right=0.0)
    vals.imag = np.interp(grid, body.grid, body.values.imag, left=0.0, right=0.0)
    beyond = grid > body.grid[-1]
    if beyond.any() and body.tail_rate > 0:
        vals[beyond] = body.tail_value * np.exp(-body.tail_rate * (grid[beyond] - body.grid[-1]))
    return vals


def _sampled_from_form(form: ExpPoly, flavor: Flavor, settings: Settings) -> Kernel:
    grid = np.linspace(0.0, settings.x_max_quad, settings.conv_grid_points + 1)
    values = form(grid)
    try:
        tail_value, tail_rate = _fit_tail(grid, values)
    except InvalidKernel:
        tail_value, tail_rate = 0.0 + 0.0j, 0.0
    return Kernel(flavor, Sampled(grid, values, tail_value, tail_rate, exact=form))


def convolve(k1: Kernel, k2: Kernel, settings: Settings = DEFAULT) -> Kernel:
    """Half-line convolution; the result is a sampled kernel of the shared flavor."""
    if k1.flavor is not k2.flavor:
        raise FlavorMismatch(f"cannot convolve {k1.flavor.value} with {k2.flavor.value}")
    f1, f2 = k1.additive_form(), k2.additive_form()
    if f1 is not None and f2 is not None:
        return _sampled_from_form(f1.convolve(f2), k1.flavor, settings)
    # discrete path with step-halving until the change is below tol_quad
    n = 2 ** 14
    prev = None
    for _ in range(4):
        grid = np.linspace(0.0, settings.x_max_quad, n + 1)
        h = grid[1] - grid[0]
        v1 = _to_sampled_body(k1, grid)
        v2 = _to_sampled_body(k2, grid)
        conv = fftconvolve(v1, v2)[: grid.size] * h
        # trapezoid endpoint correction for the discrete convolution
        conv -= 0.5 * h * (v1[0] * v2 + v2[0] * v1)
        if prev is not None:
            diff = np.max(np.abs(conv[::2] - prev))
            if diff < settings.tol_quad:
                break
        prev = conv
        n *= 2
    try:
        tail_value, tail_rate = _fit_tail(grid, conv)
    except InvalidKernel:
        tail_value, tail_rate = 0.0 + 0.0j, 0.0
    return Kernel(k1.flavor, Sampled(grid, conv, tail_value, tail_rate))


def power(kernel: Kernel, k: int, settings: Settings = DEFAULT) -> Kernel:
    """k-fold convolution power; k = 1 is the identity."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidArgument("convolution power needs an integer k >= 1 (L1 has no unit)")
    if k == 1:
        return kernel
    form = kernel.additive_form()
    if form is not None:
        return _sampled_from_form(form.power(k), kernel.flavor, settings)
    out = kernel
    for _ in range(k - 1):
        out = convolve(out, kernel, settings)
    return out


_TRANSPORT_IDS = {"power_law": "exponential",
                  "counterexample_multiplicative": "counterexample_additive"}


def to_additive(kernel: Kernel) -> Kernel:
    """Carry a multiplicative kernel onto [0, inf) via u = log t (mass preserved)."""
    if kernel.flavor is not Flavor.MULTIPLICATIVE:
        raise FlavorMismatch("to_additive expects a multiplicative kernel")
    body = kernel.body
    if isinstance(body, ClosedForm):
        cid = _TRANSPORT_IDS.get(body.catalog_id, f"transported_{body.catalog_id}")
        params = dict(body.params)
        if body.catalog_id == "power_law":
            params = {"rate": params["r"]}
        return Kernel(Flavor.ADDITIVE, ClosedForm(cid, params, body.form))
    return Kernel(Flavor.ADDITIVE, body)


# ---------------------------------------------------------------------------
# kernel spec files and CLI grammar

_CATALOG = {
    "exponential": (exponential, ("rate",)),
    "power_law": (power_law, ("r",)),
    "counterexample_additive": (counterexample_additive, ("alpha",)),
    "counterexample_multiplicative": (counterexample_multiplicative, ("alpha",)),
}


def from_catalog(name: str, args) -> Kernel:
    if name not in _CATALOG:
        raise ConfigError(f"unknown catalog kernel {name!r}; "
                          f"known: {sorted(_CATALOG)}")
    ctor, names = _CATALOG[name]
    if len(args) != len(names):
        raise ConfigError(f"catalog kernel {name} takes parameters {names}, got {tuple(args)}")
    return ctor(*args)


def load_kernel_spec(path: str, settings: Settings = DEFAULT) -> Kernel:
    """Read the textual kernel spec format.

    ``{"flavor": "additive"|"multiplicative",
       "body": {"catalog": name, "params": {...}} | {"samples": [[t, re, im], ...]}}``
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read kernel spec {path!r}: {exc}") from exc
    return kernel_from_dict(raw, settings)


def kernel_from_dict(raw: dict, settings: Settings = DEFAULT) -> Kernel:
    if not isinstance(raw, dict) or "flavor" not in raw or "body" not in raw:
        raise ConfigError("kernel spec needs 'flavor' and 'body' fields")
    try:
        flavor = Flavor(raw["flavor"])
    except ValueError:
        raise ConfigError(f"unknown flavor {raw['flavor']!r}") from None
    body = raw["body"]
    if "catalog" in body:
        name = body["catalog"]
        params = body.get("params", {})
        if name == "finite_mixture":
            comps = []
            for comp in params.get("components", []):
                coef = comp.get("coef", [1.0, 0.0])
                inner = from_catalog(comp["catalog"], list(comp.get("params", {}).values()))
                comps.append((complex(coef[0], coef[1]), inner))
            return finite_mixture(comps, flavor)
        if name not in _CATALOG:
            raise ConfigError(f"unknown catalog kernel {name!r}")
        ctor, names = _CATALOG[name]
        try:
            kern = ctor(*[params[p] for p in names])
        except KeyError as exc:
            raise ConfigError(f"catalog kernel {name} missing parameter {exc}") from None
        if kern.flavor is not flavor:
            raise ConfigError(f"catalog kernel {name} has flavor {kern.flavor.value}, "
                              f"spec says {flavor.value}")
        return kern
    if "samples" in body:
        samples = np.asarray(body["samples"], dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ConfigError("samples must be rows of [t, re, im]")
        return sampled_kernel(samples[:, 0], samples[:, 1] + 1j * samples[:, 2],
                              flavor, settings)
    raise ConfigError("kernel body needs either 'catalog' or 'samples'")


def parse_kernel_arg(text: str, settings: Settings = DEFAULT) -> Kernel:
    """CLI grammar: ``catalog:<name>(<comma-separated reals>)`` or ``file:<path>``."""
    text = text.strip()
    if text.startswith("file:"):
        return load_kernel_spec(text[5:], settings)
    if text.startswith("catalog:"):
        spec = text[len("catalog:"):]
        name, args = _parse_call(spec)
        return from_catalog(name, args)
    raise ConfigError(f"kernel spec {text!r} must start with 'catalog:' or 'file:'")


def _parse_call(spec: str):
    spec = spec.strip()
    if "(" in spec:
        if not spec.endswith(")"):
            raise ConfigError(f"malformed spec {spec!r}")
        name, _, rest = spec.partition("(")
        inner = rest[:-1].strip()
        args = []
        if inner:
            for piece in inner.split(","):
                try:
                    args.append(float(piece))
                except ValueError:
                    raise ConfigError(f"non-numeric parameter {piece!r} in {spec!r}") from None
        return name.strip(), args
    return spec, []
