"""Summability operators and the limit estimator.

The forward operator integrates the function against the kernel over the
window ending at x; the dual integrates over the window starting at x with
the reflected kernel argument.  Multiplicative kernels are handled through
the log substitution, which turns them into additive exponential-polynomial
weights; for closed-form kernels the operator then decomposes into moment
integrals of the function that can be accumulated incrementally along the
evaluation ladder.

Limit estimation is heuristic plateau detection on a geometric ladder of
evaluation points.  The four statuses are honest: ``converged`` and
``diverged`` carry evidence from the trace, ``oscillating`` requires a
stable spread across two doubling windows, and everything else is
``inconclusive``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .config import DEFAULT, Settings
from .errors import FlavorMismatch, InvalidArgument, QuadratureFailed
from .exppoly import ExpPoly
from .kernels import Flavor, Kernel, Sampled, exponential, normalize, power, power_law
from .quadrature import RunningIntegral, counter, integrate_adaptive

LOG2 = math.log(2.0)


# ---------------------------------------------------------------------------
# domain types

class Variant(enum.Enum):
    FORWARD = "forward"
    DUAL = "dual"


class Status(enum.Enum):
    CONVERGED = "converged"
    OSCILLATING = "oscillating"
    DIVERGED = "diverged"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TestFunction:
    """Bounded evaluator on a half-line with provenance metadata.

    ``evaluator`` must accept numpy arrays of abscissae in native coordinates.
    ``osc_scale`` says in which coordinate the oscillation is O(1): ``linear``
    (the abscissa itself) or ``log``; it only steers quadrature pacing.
    ``sequence`` is set for step embeddings and unlocks exact cell sums.
    """

    label: str
    evaluator: Callable
    bound: float
    support_flavor: Flavor
    classical_limit: Optional[complex] = None
    known_values: tuple = ()
    osc_scale: str = "linear"
    sequence: Optional[Callable] = None

    def __call__(self, x):
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=complex)


@dataclass(frozen=True)
class MethodDescriptor:
    kernel: Kernel
    variant: Variant = Variant.FORWARD
    iterations: int = 1
    label: str = ""

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidArgument("method iterations must be >= 1")
        if abs(self.kernel.mass() - 1.0) > 1e-6:
            raise InvalidArgument(f"method kernel is not normalized (mass {self.kernel.mass():.6g})")


@dataclass
class SummationResult:
    estimate: Optional[complex]
    status: Status
    trace: list  # [(x, value), ...]
    oscillation_amplitude: float = 0.0
    tolerance_used: float = 0.0
    evaluations: int = 0


# ---------------------------------------------------------------------------
# sequence embedding

def embed_sequence(a, label: str = "sequence") -> TestFunction:
    """Step function f(x) = a_[x] on [1, inf) for a bounded sequence a_1, a_2, ...

    ``a`` is either a finite sequence (continued by zero) or a vectorized
    callable on integer arrays.
    """
    if callable(a):
        seq = a
        probe = np.abs(np.asarray(seq(np.arange(1, 4097))))
        bound = float(probe.max())
    else:
        arr = np.asarray(list(a), dtype=complex)
        if arr.size == 0:
            raise InvalidArgument("cannot embed an empty sequence")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgument("sequence entries must be finite")

        def seq(n, _arr=arr):
            n = np.asarray(n, dtype=np.int64)
            out = np.zeros(n.shape, dtype=complex)
            ok = (n >= 1) & (n <= _arr.size)
            out[ok] = _arr[n[ok] - 1]
            return out

        bound = float(np.abs(arr).max())

    def evaluator(x, _seq=seq):
        x = np.asarray(x, dtype=float)
        return _seq(np.floor(x).astype(np.int64))

    return TestFunction(label=label, evaluator=evaluator, bound=bound,
                        support_flavor=Flavor.MULTIPLICATIVE,
                        osc_scale="linear", sequence=seq)


def discrete_cesaro(a, n: int) -> complex:
    """Plain arithmetic mean of a_1..a_n (the discrete bridge oracle)."""
    idx = np.arange(1, n + 1)
    vals = a(idx) if callable(a) else np.asarray(list(a)[:n], dtype=complex)
    return complex(np.sum(vals) / n)


# ---------------------------------------------------------------------------
# closed-form multiplicative machinery

def _logpow_antideriv(j: int, s: complex, t: np.ndarray) -> np.ndarray:
    """Antiderivative of (log t)^j * t^s for s != -1, by parts recursively."""
    base = t ** (s + 1) / (s + 1)
    if j == 0:
        return base
    return base * np.log(t) ** j - (j / (s + 1)) * _logpow_antideriv(j - 1, s, t)


class _CellMoments:
    """Exact cumulative cell sums  sum_n a_n int_n^{n+1} (log t)^j t^s dt.

    Chunked so that arbitrarily distant endpoints never materialize the whole
    index range at once.
    """

    CHUNK = 1 << 20

    def __init__(self, seq, j: int, s: complex):
        self.seq = seq
        self.j = j
        self.s = s
        self.n_done = 1          # cells [1, n_done) summed
        self.total = 0.0 + 0.0j

    def _cells(self, lo: int, hi: int) -> complex:
        total = 0.0 + 0.0j
        n = lo
        while n < hi:
            m = min(n + self.CHUNK, hi)
            idx = np.arange(n, m, dtype=np.int64)
            a = np.asarray(self.seq(idx), dtype=complex)
            g_hi = _logpow_antideriv(self.j, self.s, (idx + 1).astype(float))
            g_lo = _logpow_antideriv(self.j, self.s, idx.astype(float))
            total += np.sum(a * (g_hi - g_lo))
            counter.add(idx.size)
            n = m
        return total

    def _partial_cell(self, lo: float, hi: float) -> complex:
        """Contribution of the (single) cell slice [lo, hi) inside one index cell."""
        if hi <= lo:
            return 0.0 + 0.0j
        n = int(math.floor(lo))
        a = complex(np.asarray(self.seq(np.array([n])), dtype=complex)[0])
        g = _logpow_antideriv(self.j, self.s, np.array([lo, hi]))
        return a * complex(g[1] - g[0])

    def value_to(self, x: float) -> complex:
        """int_1^x f(t) (log t)^j t^s dt (cumulative; endpoints must not decrease)."""
        n_x = int(math.floor(x))
        if n_x < self.n_done:
            # backward query: recompute statelessly (slow path, rarely hit)
            return self.range_value(1.0, x)
        self.total += self._cells(self.n_done, n_x)
        self.n_done = n_x
        if x > n_x >= 1:
            return self.total + self._partial_cell(float(n_x), x)
        return self.total

    def range_value(self, a: float, b: float) -> complex:
        """int_a^b, stateless (no cumulative cache): cost is O(b - a)."""
        a = max(a, 1.0)
        if b <= a:
            return 0.0 + 0.0j
        na, nb = int(math.floor(a)), int(math.floor(b))
        if na == nb:
            return self._partial_cell(a, b)
        total = self._partial_cell(a, float(na + 1))
        total += self._cells(na + 1, nb)
        total += self._partial_cell(float(nb), b)
        return total


class _SmoothMoments:
    """Cumulative moment integrals of a smooth function against a power weight.

    Depending on the function's oscillation coordinate the integral runs in
    t (weight (log t)^j t^s) or in v = log t (weight v^j e^{(s+1) v}).
    """

    def __init__(self, f: TestFunction, j: int, s: complex, settings: Settings):
        self.j = j
        self.s = s
        if f.osc_scale == "log":
            def g(v, _f=f, _j=j, _s=s):
                return _f(np.exp(v)) * v ** _j * np.exp((_s + 1) * v)
            self.integral = RunningIntegral(g, 0.0, tol_density=1e-11, panel=0.5)
            self.in_log = True
        else:
            def g(t, _f=f, _j=j, _s=s):
                return _f(t) * np.log(t) ** _j * t ** _s
            self.integral = RunningIntegral(g, 1.0, tol_density=1e-11, panel=3.0)
            self.in_log = False

    def value_to(self, x: float) -> complex:
        return self.integral.value_to(math.log(x) if self.in_log else x)


class _MultForwardClosed:
    """Forward operator for a closed-form multiplicative kernel.

    Expands psi(x/t) into moment integrals of f, accumulated incrementally:
    U f(x) = sum_terms c x^mu sum_j C(p,j) (log x)^(p-j) (-1)^j M_{j,mu}(x),
    with M_{j,mu}(x) = int_1^x f(t) (log t)^j t^(-mu-1) dt.
    """

    def __init__(self, form: ExpPoly, f: TestFunction, settings: Settings):
        self.form = form
        self.f = f
        self.moments = {}
        for t in form:
            for j in range(t.power + 1):
                key = (j, t.rate)
                if key not in self.moments:
                    s = -t.rate - 1.0
                    if f.sequence is not None:
                        self.moments[key] = _CellMoments(f.sequence, j, s)
                    else:
                        self.moments[key] = _SmoothMoments(f, j, s, settings)

    def __call__(self, x: float) -> complex:
        w = math.log(x)
        val = 0.0 + 0.0j
        for t in self.form:
            xpmu = np.exp(t.rate * w)
            for j in range(t.power + 1):
                mj = self.moments[(j, t.rate)].value_to(x)
                val += (t.coef * xpmu * math.comb(t.power, j)
                        * w ** (t.power - j) * (-1) ** j * mj)
        return complex(val)


class _MultDualClosed:
    """Dual operator for a closed-form multiplicative kernel.

    Integrates over geometric segments [x 2^k, x 2^(k+1)] until either the
    kernel tail is negligible or the oscillation-resolution budget runs out;
    the unresolved remainder is completed by the exact remaining kernel mass
    times the function's recent weighted average (exact for functions that
    settle, negligible for functions whose local means die out).

    Segment values come from cumulative moment integrals
    N_{j,mu}(e) = int_1^e f(t) (log t)^j t^(mu-1) dt evaluated at the segment
    edges.  Along the standard ladder the edges are powers of two, so the
    cumulative integrals advance monotonically and are shared across every
    ladder point instead of being recomputed per evaluation.
    """

    EDGE_CAP = 3.2e7          # furthest edge the shared cumulative integrals reach
    SPAN_BUDGET = 4.0e6       # per-evaluation t-span in the uncached fallback
    SEG_BUDGET = 64           # max geometric segments (log scale)

    def __init__(self, form: ExpPoly, f: TestFunction, settings: Settings):
        self.form = form
        self.f = f
        self.settings = settings
        self.adaptive_in_log = f.sequence is None and f.osc_scale == "log"
        self.backends = {}
        self.memo: dict[tuple, complex] = {}
        self.max_edge: dict[tuple, float] = {}
        if not self.adaptive_in_log:
            for t in form:
                for j in range(t.power + 1):
                    key = (j, t.rate)
                    if key in self.backends:
                        continue
                    s = t.rate - 1.0
                    if f.sequence is not None:
                        self.backends[key] = _CellMoments(f.sequence, j, s)
                    else:
                        def g(u, _f=f, _j=j, _s=s):
                            return _f(u) * np.log(u) ** _j * u ** _s
                        self.backends[key] = RunningIntegral(g, 1.0,
                                                            tol_density=1e-11, panel=3.0)

    # -- cumulative moment plumbing -----------------------------------------

    def _cum(self, key, edge: float) -> complex:
        memo_key = (key, edge)
        if memo_key in self.memo:
            return self.memo[memo_key]
        backend = self.backends[key]
        top = self.max_edge.get(key, 1.0)
        if edge >= top:
            val = backend.value_to(edge)
            self.max_edge[key] = edge
        elif isinstance(backend, _CellMoments):
            val = backend.range_value(1.0, edge)
        else:
            # missed intermediate edge: integrate from the nearest cached one
            below = [e for (k2, e) in self.memo if k2 == key and e <= edge]
            base_e = max(below) if below else 1.0
            base_v = self.memo.get((key, base_e), 0.0 + 0.0j)
            val = base_v + integrate_adaptive(backend.f, base_e, edge,
                                              self.settings.tol_quad, order=12,
                                              initial_panels=max(4, int((edge - base_e) / 2.0)))
        self.memo[memo_key] = val
        return val

    def _segment_from_moments(self, x: float, a: float, b: float) -> complex:
        """int over t in [a, b] of f(t) psi(t/x) dt/t via cached moments."""
        w = math.log(x)
        val = 0.0 + 0.0j
        for t in self.form:
            xpmu = np.exp(-t.rate * w)
            for j in range(t.power + 1):
                mj = self._cum((j, t.rate), b) - self._cum((j, t.rate), a)
                val += (t.coef * xpmu * math.comb(t.power, j)
                        * (-w) ** (t.power - j) * mj)
        return val

    def _segment_adaptive(self, x: float, v_lo: float, v_hi: float) -> complex:
        f, form = self.f, self.form
        tol = self.settings.tol_quad
        if self.adaptive_in_log:
            g = lambda v: f(x * np.exp(v)) * form(v)
            return integrate_adaptive(g, v_lo, v_hi, tol, order=12,
                                      initial_panels=max(4, int((v_hi - v_lo) / 0.5)))
        t_lo, t_hi = x * math.exp(v_lo), x * math.exp(v_hi)
        g = lambda t: f(t) * form(np.log(t) - math.log(x)) / t
        return integrate_adaptive(g, t_lo, t_hi, tol, order=12,
                                  initial_panels=max(4, min(400_000, int((t_hi - t_lo) / 2.0))))

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x: float) -> complex:
        tol = self.settings.tol_quad * (1.0 + self.f.bound)
        use_cached = not self.adaptive_in_log and x <= self.EDGE_CAP
        total = 0.0 + 0.0j
        seg_sum: list[complex] = []
        seg_weight: list[complex] = []
        span = 0.0
        k = 0
        while k < self.SEG_BUDGET:
            v_lo, v_hi = k * LOG2, (k + 1) * LOG2
            if self.form.abs_tail_bound(v_lo) * self.f.bound < tol:
                break
            # exact power-of-two edges so the moment memo is shared across x
            a, b = x * (2.0 ** k), x * (2.0 ** (k + 1))
            if use_cached:
                if b > self.EDGE_CAP and k >= 2:
                    break
                s = self._segment_from_moments(x, a, b)
            else:
                if not self.adaptive_in_log:
                    span += b - a
                    if span > self.SPAN_BUDGET and k > 0:
                        break
                s = self._segment_adaptive(x, v_lo, v_hi)
            seg_sum.append(s)
            seg_weight.append(self.form.integral(v_lo, v_hi))
            total += s
            k += 1
        # complete the unresolved kernel tail with the recent weighted average
        rem = self.form.tail_integral(k * LOG2)
        if abs(rem) > 0 and seg_sum:
            s_recent = sum(seg_sum[-2:])
            w_recent = sum(seg_weight[-2:])
            if abs(w_recent) > 1e-12:
                total += rem * (s_recent / w_recent)
        return complex(total)


# ---------------------------------------------------------------------------
# additive paths

class _AddForwardClosed:
    def __init__(self, form: ExpPoly, f: TestFunction, settings: Settings):
        self.form = form
        self.f = f
        self.settings = settings
        eps = settings.tol_quad / (10.0 * (1.0 + f.bound))
        self.cut = form.support_cutoff(eps)

    def __call__(self, x: float) -> complex:
        upper = min(x, self.cut)
        f, form = self.f, self.form
        g = lambda s: f(x - s) * form(s)
        tol = self.settings.tol_quad * (1.0 + f.bound)
        return integrate_adaptive(g, 0.0, upper, tol, order=12,
                                  max_evals=self.settings.max_evals)


class _AddDualClosed(_AddForwardClosed):
    def __call__(self, x: float) -> complex:
        f, form = self.f, self.form
        g = lambda s: f(x + s) * form(s)
        tol = self.settings.tol_quad * (1.0 + f.bound)
        return integrate_adaptive(g, 0.0, self.cut, tol, order=12,
                                  max_evals=self.settings.max_evals)


class _SampledOperator:
    """Trapezoid evaluation against a sampled kernel grid (either variant).

    Multiplicative functions are transported through u = log t so the kernel
    grid (uniform in additive coordinates) can be used directly.
    """

    def __init__(self, body: Sampled, f: TestFunction, variant: Variant,
                 flavor: Flavor, settings: Settings):
        self.body = body
        self.f = f
        self.variant = variant
        self.flavor = flavor
        self.settings = settings

    def _f_add(self, u):
        if self.flavor is Flavor.MULTIPLICATIVE:
            return self.f(np.exp(u))
        return self.f(u)

    def __call__(self, x: float) -> complex:
        body = self.body
        w = math.log(x) if self.flavor is Flavor.MULTIPLICATIVE else x
        grid, vals = body.grid, body.values
        if self.variant is Variant.FORWARD:
            upper = min(w, grid[-1])
            n = int(np.searchsorted(grid, upper, side="right"))
            g = grid[:n]
            fv = self._f_add(w - g) * vals[:n]
            counter.add(g.size)
            total = complex(np.trapezoid(fv, g))
            if n < grid.size and upper > g[-1]:
                # partial last cell
                frac = (upper - g[-1]) / (grid[1] - grid[0])
                v_end = vals[n - 1] + (vals[n] - vals[n - 1]) * frac
                total += 0.5 * (upper - g[-1]) * (fv[-1] + self._f_add(np.array([w - upper]))[0] * v_end)
            if w > grid[-1] and body.tail_rate > 0:
                stretch = min(w - grid[-1], 40.0 / body.tail_rate)
                tail = lambda s: (self._f_add(np.atleast_1d(w - grid[-1] - s))
                                  * body.tail_value * np.exp(-body.tail_rate * s))
                total += integrate_adaptive(tail, 0.0, stretch,
                                            self.settings.tol_quad, order=12)
            return total
        fv = self._f_add(w + grid) * vals
        counter.add(grid.size)
        total = complex(np.trapezoid(fv, grid))
        if body.tail_rate > 0:
            stretch = 40.0 / body.tail_rate
            tail = lambda s: (self._f_add(np.atleast_1d(w + grid[-1] + s))
                              * body.tail_value * np.exp(-body.tail_rate * s))
            total += integrate_adaptive(tail, 0.0, stretch,
                                        self.settings.tol_quad, order=12)
        return total


# ---------------------------------------------------------------------------
# public operator surface

def _check_domain(kernel: Kernel, f: TestFunction):
    if kernel.flavor is not f.support_flavor:
        raise FlavorMismatch(
            f"kernel flavor {kernel.flavor.value} does not match function domain "
            f"{f.support_flavor.value}")


def _make_evaluator(kernel: Kernel, f: TestFunction, variant: Variant,
                    settings: Settings):
    _check_domain(kernel, f)
    form = kernel.additive_form()
    if kernel.flavor is Flavor.MULTIPLICATIVE and form is not None:
        if variant is Variant.FORWARD:
            return _MultForwardClosed(form, f, settings)
        return _MultDualClosed(form, f, settings)
    if form is not None:
        cls = _AddForwardClosed if variant is Variant.FORWARD else _AddDualClosed
        return cls(form, f, settings)
    return _SampledOperator(kernel.body, f, variant, kernel.flavor, settings)


def apply_forward(kernel: Kernel, f: TestFunction, x: float,
                  settings: Settings = DEFAULT) -> complex:
    """Windowed convolution value at x (the partial mean)."""
    if x <= kernel.support_origin():
        raise InvalidArgument(f"x={x} is not inside the kernel's support half-line")
    return _make_evaluator(kernel, f, Variant.FORWARD, settings)(float(x))


def apply_dual(kernel: Kernel, f: TestFunction, x: float,
               settings: Settings = DEFAULT) -> complex:
    """Dual (outward-window) value at x."""
    if x <= kernel.support_origin():
        raise InvalidArgument(f"x={x} is not inside the kernel's support half-line")
    return _make_evaluator(kernel, f, Variant.DUAL, settings)(float(x))


def chain_apply(kernels: Sequence[Kernel], f: TestFunction,
                xs: Sequence[float], settings: Settings = DEFAULT,
                grid_points: int = 2 ** 20) -> np.ndarray:
    """Successive windowed convolutions evaluated at additive probe points.

    One dense uniform grid and discrete trapezoid convolutions replace nested
    adaptive quadrature, so composing operators costs one FFT per kernel.
    """
    for k in kernels:
        if k.flavor is not Flavor.ADDITIVE:
            raise FlavorMismatch("chain_apply works in additive coordinates")
    _check_domain(kernels[0], f)
    x_max = float(max(xs))
    grid = np.linspace(0.0, x_max, grid_points + 1)
    h = grid[1] - grid[0]
    from scipy.signal import fftconvolve

    def conv(values_f, kern: Kernel):
        kv = kern.additive_form()
        kvals = kv(grid) if kv is not None else _sampled_on(kern.body, grid)
        out = fftconvolve(values_f, kvals)[: grid.size] * h
        out -= 0.5 * h * (values_f[0] * kvals + kvals[0] * values_f)
        return out

    values = f(grid)
    counter.add(grid.size)
    for k in kernels:
        values = conv(values, k)
    idx = np.clip(np.round(np.asarray(xs) / h).astype(int), 0, grid.size - 1)
    return values[idx]


def nested_apply(outer: Kernel, inner: Kernel, f: TestFunction,
                 xs: Sequence[float], settings: Settings = DEFAULT,
                 grid_points: int = 2 ** 20) -> np.ndarray:
    """U_outer(U_inner f) at the given additive probe points."""
    return chain_apply([inner, outer], f, xs, settings, grid_points)


def _sampled_on(body: Sampled, grid):
    out = np.empty(grid.size, dtype=complex)
    out.real = np.interp(grid, body.grid, body.values.real, left=0.0, right=0.0)
    out.imag = np.interp(grid, body.grid, body.values.imag, left=0.0, right=0.0)
    return out


def transport_function(f: TestFunction) -> TestFunction:
    """Multiplicative function viewed through u = log t as an additive one."""
    if f.support_flavor is not Flavor.MULTIPLICATIVE:
        raise FlavorMismatch("transport_function expects a multiplicative-domain function")

    def evaluator(u, _f=f):
        return _f.evaluator(np.exp(np.asarray(u, dtype=float)))

    return TestFunction(label=f.label + "@log", evaluator=evaluator, bound=f.bound,
                        support_flavor=Flavor.ADDITIVE,
                        classical_limit=f.classical_limit,
                        osc_scale="linear" if f.osc_scale == "log" else f.osc_scale)


def uniform_continuity_bound(kernel: Kernel, delta: float,
                             settings: Settings = DEFAULT) -> float:
    """Modulus-of-continuity bound for the forward operator on the unit ball.

    |U f(x) - U f(y)| <= ||f||_inf * (int |phi(t) - phi(t+d)| dt + int_0^d |phi|)
    for |x - y| <= d, with both integrals evaluated by quadrature.
    """
    form = kernel.additive_form()
    if form is None:
        raise InvalidArgument("continuity bound needs a closed-form kernel")
    cut = form.support_cutoff(0.01 * settings.tol_quad)
    shift = integrate_adaptive(lambda t: np.abs(form(t) - form(t + delta)),
                               0.0, cut, settings.tol_quad, order=12)
    head = integrate_adaptive(lambda t: np.abs(form(t)), 0.0, delta,
                              settings.tol_quad, order=12)
    return float(shift.real + head.real)


# ---------------------------------------------------------------------------
# named methods

def method_Mr(r: float, variant: Variant = Variant.FORWARD) -> MethodDescriptor:
    """Power-weighted mean family; r = 1 is the plain continuous mean."""
    if not (r > 0):
        raise InvalidArgument("the power-mean family needs r > 0 for an integrable kernel")
    star = "*" if variant is Variant.DUAL else ""
    return MethodDescriptor(power_law(r), variant, 1, label=f"M{star}_{r:g}")


def method_holder(k: int) -> MethodDescriptor:
    """k-fold iterate of the continuous mean."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidArgument("iterate count must be an integer >= 1")
    return MethodDescriptor(power_law(1.0), Variant.FORWARD, int(k), label=f"H_{k}")


def k_estimator(flavor: Flavor) -> MethodDescriptor:
    """Fixed nonvanishing-transform kernel standing in for the weak* translation method.

    The proxy shares the weak* method's domain, so it is interchangeable with
    it on everything this engine can test.
    """
    if flavor is Flavor.ADDITIVE:
        return MethodDescriptor(exponential(1.0), Variant.FORWARD, 1,
                                label="K~S_exp(1)")
    return MethodDescriptor(power_law(1.0), Variant.FORWARD, 1, label="P~M_1")


def method_S(kernel: Kernel, variant: Variant = Variant.FORWARD,
             iterations: int = 1, label: str = "") -> MethodDescriptor:
    kernel = normalize(kernel)
    if not label:
        star = "*" if variant is Variant.DUAL else ""
        cid = getattr(kernel.body, "catalog_id", "sampled")
        label = f"S{star}_{cid}"
    return MethodDescriptor(kernel, variant, iterations, label=label)


# ---------------------------------------------------------------------------
# limit estimation

def _spread(vals) -> float:
    arr = np.asarray(vals)
    return float(np.max(np.abs(arr[:, None] - arr[None, :]))) if arr.size > 1 else 0.0


def iterated_kernel(method: MethodDescriptor, settings: Settings = DEFAULT) -> Kernel:
    if method.iterations == 1:
        return method.kernel
    return power(method.kernel, method.iterations, settings)


def _nested_cache_evaluator(method: MethodDescriptor, f: TestFunction,
                            settings: Settings, x_top: float):
    """Iterate by caching each level on a log-spaced grid with linear interpolation."""
    kernel = method.kernel
    n = settings.iterate_cache_points
    if kernel.flavor is Flavor.MULTIPLICATIVE:
        abscissae = np.exp(np.linspace(math.log(1.0 + 1e-3), math.log(x_top), n))
    else:
        abscissae = np.exp(np.linspace(math.log(1e-3), math.log(x_top), n))
    current = f
    for _ in range(method.iterations - 1):
        ev = _make_evaluator(kernel, current, Variant.FORWARD, settings)
        cached = np.array([ev(float(t)) if t > kernel.support_origin() else 0.0
                           for t in abscissae], dtype=complex)

        def interp_eval(x, _a=abscissae, _c=cached):
            x = np.asarray(x, dtype=float)
            out = np.empty(x.shape, dtype=complex)
            out.real = np.interp(x, _a, _c.real, left=0.0, right=_c.real[-1])
            out.imag = np.interp(x, _a, _c.imag, left=0.0, right=_c.imag[-1])
            return out

        current = TestFunction(label=current.label + "|mean", evaluator=interp_eval,
                               bound=current.bound * kernel.l1_norm(),
                               support_flavor=current.support_flavor,
                               osc_scale=current.osc_scale)
    return _make_evaluator(kernel, current, method.variant, settings)


def estimate_limit(method: MethodDescriptor, f: TestFunction,
                   settings: Settings = DEFAULT, tol: Optional[float] = None,
                   iterate_strategy: str = "auto") -> SummationResult:
    """Plateau-detected limit of the (possibly iterated) operator along the ladder."""
    _check_domain(method.kernel, f)
    tol_limit = tol if tol is not None else settings.tol_limit(f.bound)
    start_evals = counter.count

    if method.iterations > 1:
        if iterate_strategy == "nested" or (iterate_strategy == "auto"
                                            and method.kernel.additive_form() is None):
            x_top = settings.ladder_x0 * settings.ladder_ratio ** settings.ladder_max_steps
            evaluator = _nested_cache_evaluator(method, f, settings, x_top)
            kern_eff = method.kernel
            l1_eff = method.kernel.l1_norm() ** method.iterations
        else:
            kern_eff = iterated_kernel(method, settings)
            evaluator = _make_evaluator(kern_eff, f, method.variant, settings)
            l1_eff = kern_eff.l1_norm()
    else:
        kern_eff = method.kernel
        evaluator = _make_evaluator(kern_eff, f, method.variant, settings)
        l1_eff = kern_eff.l1_norm()

    cap = 10.0 * f.bound * max(l1_eff, 1.0) + 1e-12
    window = settings.plateau_window
    trace: list[tuple[float, complex]] = []
    values: list[complex] = []
    status = Status.INCONCLUSIVE
    estimate = None
    amplitude = 0.0

    x = settings.ladder_x0
    for j in range(settings.ladder_max_steps + 1):
        if x <= kern_eff.support_origin():
            x *= settings.ladder_ratio
            continue
        try:
            v = evaluator(float(x))
        except QuadratureFailed:
            # the operator value could not be resolved at this scale; report
            # whatever the trace supports rather than guessing further out
            break
        trace.append((float(x), complex(v)))
        values.append(complex(v))
        if len(values) >= window:
            recent = values[-window:]
            if _spread(recent) < tol_limit:
                status = Status.CONVERGED
                estimate = complex(np.mean(recent))
                break
        if (len(values) >= 3
                and all(abs(values[i]) > cap for i in (-3, -2, -1))
                and abs(values[-1]) > abs(values[-2]) > abs(values[-3])):
            status = Status.DIVERGED
            break
        x *= settings.ladder_ratio

    if status is Status.INCONCLUSIVE and len(values) >= 2 * window:
        s1 = _spread(values[-window:])
        s2 = _spread(values[-2 * window:-window])
        bounded = max(abs(v) for v in values[-2 * window:]) <= cap
        if s1 > tol_limit and s2 > tol_limit and bounded and 0.3 <= s1 / max(s2, 1e-300) <= 3.0:
            status = Status.OSCILLATING
            amplitude = 0.5 * _spread(values[-2 * window:])

    return SummationResult(estimate=estimate, status=status, trace=trace,
                           oscillation_amplitude=amplitude,
                           tolerance_used=tol_limit,
                           evaluations=counter.count - start_evals)
