"""Test-function catalog and the cross-method verification matrix.

Every corpus entry is a closed-form evaluator with pre-derived expected
values; nothing is loaded from data files.  The verification matrix encodes
the equivalence statements the engine is supposed to witness — agreement of
the power-mean family, iterate and dual equivalence, regularity on convergent
inputs, the discrete embedding bridge, and the spectral separation produced
by a kernel whose transform vanishes at the test character's frequency.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT, Settings
from .engine import (MethodDescriptor, Status, TestFunction, Variant,
                     embed_sequence, estimate_limit, k_estimator, method_Mr,
                     method_holder)
from .errors import ConfigError
from .kernels import Flavor, counterexample_additive, exponential
from .quadrature import counter


# ---------------------------------------------------------------------------
# function catalog

def _const(c: complex, flavor: Flavor, label: str) -> TestFunction:
    return TestFunction(label=label,
                        evaluator=lambda x, _c=c: np.full(np.shape(x), _c, dtype=complex),
                        bound=abs(c), support_flavor=flavor, classical_limit=c,
                        osc_scale="log" if flavor is Flavor.MULTIPLICATIVE else "linear",
                        known_values=(("*", c, "constant"),))


def _char_additive(alpha: float) -> TestFunction:
    return TestFunction(label=f"char_{alpha:g}",
                        evaluator=lambda x, a=alpha: np.exp(1j * a * x),
                        bound=1.0, support_flavor=Flavor.ADDITIVE,
                        osc_scale="linear",
                        known_values=(("K", None, "no generalized limit; pure character"),))


def _char_multiplicative(alpha: float) -> TestFunction:
    return TestFunction(label=f"char_{alpha:g}",
                        evaluator=lambda x, a=alpha: np.exp(1j * a * np.log(x)),
                        bound=1.0, support_flavor=Flavor.MULTIPLICATIVE,
                        osc_scale="log",
                        known_values=(("M", None, "mean modulus 1/sqrt(1+alpha^2)"),))


def builtin_corpus() -> list[TestFunction]:
    """The fixed catalog of bounded test functions, both domain flavors."""
    add, mul = Flavor.ADDITIVE, Flavor.MULTIPLICATIVE
    out = [
        _const(1.0, add, "one"), _const(1.0, mul, "one"),
        _const(0.5, add, "half"), _const(0.5, mul, "half"),
        TestFunction("settle", lambda x: 0.3 + np.exp(-x), 1.3, add,
                     classical_limit=0.3,
                     known_values=(("*", 0.3, "classical limit"),)),
        TestFunction("settle", lambda x: 0.3 + np.exp(-x), 1.3, mul,
                     classical_limit=0.3, osc_scale="log",
                     known_values=(("*", 0.3, "classical limit"),)),
        TestFunction("sin", lambda x: np.sin(x), 1.0, add, osc_scale="linear",
                     known_values=(("S_exp1", None, "oscillating: (sin x - cos x)/2 + e^-x/2"),)),
        TestFunction("sin", lambda x: np.sin(x), 1.0, mul, osc_scale="linear",
                     known_values=(("M", 0.0, "(cos 1 - cos x)/x -> 0"),
                                   ("M_2", 0.0, "(2/x^2)(sin t - t cos t) -> 0"),
                                   ("H_2", 0.0, "second mean of an O(1/x) mean"),
                                   ("M*_1", 0.0, "x * int_x^inf sin(t)/t^2 dt -> 0"),)),
        TestFunction("cos", lambda x: np.cos(x), 1.0, add, osc_scale="linear"),
        TestFunction("cos", lambda x: np.cos(x), 1.0, mul, osc_scale="linear",
                     known_values=(("M", 0.0, "(sin x - sin 1)/x -> 0"),)),
        TestFunction("sin_sq", lambda x: np.sin(x ** 2), 1.0, add, osc_scale="linear",
                     known_values=(("S_exp1", 0.0, "Fresnel-tail decay"),)),
    ]
    for alpha in (0.5, 1.0, 2.0):
        out.append(_char_additive(alpha))
        out.append(_char_multiplicative(alpha))
    alt = embed_sequence(lambda n: (-1.0) ** n, "alt")
    out.append(alt)
    blocks = embed_sequence(lambda n: ((np.asarray(n) - 1) % 4 < 2).astype(float), "blocks")
    out.append(TestFunction("blocks", blocks.evaluator, 1.0, mul,
                            sequence=blocks.sequence,
                            known_values=(("M", 0.5, "period-4 blocks 1,1,0,0"),)))
    ones = embed_sequence([1.0] * 5, "finite_ones")
    out.append(TestFunction("finite_ones", ones.evaluator, 1.0, mul,
                            classical_limit=0.0, sequence=ones.sequence,
                            known_values=(("M", 0.0, "finitely supported"),)))
    return out


def corpus_map(corpus: Optional[list] = None) -> dict:
    """Index the catalog by (label, flavor)."""
    out = {}
    for f in corpus if corpus is not None else builtin_corpus():
        out[(f.label, f.support_flavor)] = f
    return out


# ---------------------------------------------------------------------------
# method catalog

def method_catalog() -> dict[str, MethodDescriptor]:
    """Named methods addressable from cases and the CLI."""
    def relabel(m: MethodDescriptor, label: str) -> MethodDescriptor:
        return MethodDescriptor(m.kernel, m.variant, m.iterations, label)

    cat = {
        # multiplicative flavor
        "M": relabel(method_Mr(1.0), "M"),
        "M_1/2": relabel(method_Mr(0.5), "M_1/2"),
        "M_2": relabel(method_Mr(2.0), "M_2"),
        "H_1": relabel(method_holder(1), "H_1"),
        "H_2": method_holder(2),
        "H_3": method_holder(3),
        "M*_1/2": relabel(method_Mr(0.5, Variant.DUAL), "M*_1/2"),
        "M*_1": relabel(method_Mr(1.0, Variant.DUAL), "M*_1"),
        "M*_2": relabel(method_Mr(2.0, Variant.DUAL), "M*_2"),
        "P": relabel(k_estimator(Flavor.MULTIPLICATIVE), "P"),
        # additive flavor
        "S_exp1": MethodDescriptor(exponential(1.0), Variant.FORWARD, 1, "S_exp1"),
        "S_exp2": MethodDescriptor(exponential(2.0), Variant.FORWARD, 1, "S_exp2"),
        "S*_exp1": MethodDescriptor(exponential(1.0), Variant.DUAL, 1, "S*_exp1"),
        "K": relabel(k_estimator(Flavor.ADDITIVE), "K"),
        "S_ce1": MethodDescriptor(counterexample_additive(1.0), Variant.FORWARD, 1, "S_ce1"),
    }
    return cat


# ---------------------------------------------------------------------------
# verification matrix

@dataclass(frozen=True)
class VerificationCase:
    case_id: str
    function: str                 # corpus label
    flavor: Flavor
    methods: tuple                # method labels
    expected: str                 # "all_agree" | "separation"
    value: Optional[complex] = None
    statuses: tuple = ()          # expected statuses for separation cases
    tolerance: Optional[float] = None
    principle: str = ""

    def __post_init__(self):
        if self.expected not in ("all_agree", "separation"):
            raise ConfigError(f"unknown expectation kind {self.expected!r}")
        if self.expected == "separation" and len(self.methods) != 2:
            raise ConfigError("separation cases reference exactly two methods")

    def to_dict(self) -> dict:
        d = {"case_id": self.case_id, "function": self.function,
             "flavor": self.flavor.value, "methods": list(self.methods),
             "expected": self.expected, "principle": self.principle}
        if self.value is not None:
            d["value"] = [complex(self.value).real, complex(self.value).imag]
        if self.statuses:
            d["statuses"] = list(self.statuses)
        if self.tolerance is not None:
            d["tolerance"] = self.tolerance
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "VerificationCase":
        try:
            value = raw.get("value")
            if isinstance(value, (list, tuple)):
                value = complex(value[0], value[1])
            return cls(case_id=raw["case_id"], function=raw["function"],
                       flavor=Flavor(raw["flavor"]), methods=tuple(raw["methods"]),
                       expected=raw["expected"], value=value,
                       statuses=tuple(raw.get("statuses", ())),
                       tolerance=raw.get("tolerance"),
                       principle=raw.get("principle", ""))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"malformed verification case: {exc}") from exc


@dataclass
class CaseOutcome:
    case_id: str
    passed: bool
    detail: str
    measured: dict = field(default_factory=dict)  # method -> {status, estimate, amplitude}

    def to_dict(self) -> dict:
        return {"case_id": self.case_id, "passed": self.passed,
                "detail": self.detail, "measured": self.measured}


@dataclass
class VerificationReport:
    outcomes: list
    wall_time: float
    evaluations: int

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "wall_time": self.wall_time,
                "evaluations": self.evaluations,
                "outcomes": [o.to_dict() for o in sorted(self.outcomes,
                                                         key=lambda o: o.case_id)]}


def builtin_cases() -> list[VerificationCase]:
    mul, add = Flavor.MULTIPLICATIVE, Flavor.ADDITIVE
    return [
        VerificationCase("power_mean_sin", "sin", mul, ("M_1/2", "M", "M_2"),
                         "all_agree", 0.0,
                         principle="power-mean family equivalence on an oscillation with decaying mean"),
        VerificationCase("regular_const_mul", "one", mul,
                         ("M_1/2", "M", "M_2", "H_2", "H_3", "M*_1", "P"),
                         "all_agree", 1.0, principle="regularity on constants"),
        VerificationCase("regular_const_add", "one", add,
                         ("S_exp1", "S_exp2", "S*_exp1", "K", "S_ce1"),
                         "all_agree", 1.0, principle="regularity on constants"),
        VerificationCase("regular_settle_add", "settle", add,
                         ("S_exp1", "S_exp2", "K"),
                         "all_agree", 0.3, principle="regularity on a convergent function"),
        VerificationCase("regular_settle_mul", "settle", mul,
                         ("M", "M_2", "H_2", "M*_1", "P"),
                         "all_agree", 0.3, principle="regularity on a convergent function"),
        VerificationCase("iterate_sin", "sin", mul, ("H_1", "H_2", "H_3"),
                         "all_agree", 0.0, principle="iterated means agree with the plain mean"),
        VerificationCase("dual_sin", "sin", mul, ("M", "M*_1"),
                         "all_agree", 0.0, principle="forward and dual variants are equivalent"),
        VerificationCase("separation_char", "char_1", add, ("S_ce1", "K"),
                         "separation", 0.0,
                         statuses=("converged", "oscillating"),
                         principle="a transform zero at the character frequency separates the methods"),
        VerificationCase("bridge_alt", "alt", mul, ("M",), "all_agree", 0.0,
                         principle="embedded alternating sequence averages to zero"),
        VerificationCase("bridge_blocks", "blocks", mul, ("M",), "all_agree", 0.5,
                         principle="embedded periodic blocks average to their density"),
        VerificationCase("bridge_finite", "finite_ones", mul, ("M", "M_2"),
                         "all_agree", 0.0, principle="finitely supported sequences vanish in the mean"),
    ]


def load_cases(path: str) -> list[VerificationCase]:
    """Read a JSON case file (a list of VerificationCase dicts)."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read case file {path!r}: {exc}") from exc
    if not isinstance(raw, list):
        raise ConfigError("case file must hold a JSON list")
    return [VerificationCase.from_dict(item) for item in raw]


def _measure(result) -> dict:
    est = result.estimate
    return {"status": result.status.value,
            "estimate": None if est is None else [est.real, est.imag],
            "amplitude": result.oscillation_amplitude,
            "evaluations": result.evaluations}


def _run_case(case: VerificationCase, settings: Settings) -> CaseOutcome:
    f = corpus_map()[(case.function, case.flavor)]
    methods = method_catalog()
    tol = case.tolerance if case.tolerance is not None \
        else 5.0 * settings.tol_limit(f.bound)
    measured = {}
    results = {}
    for label in case.methods:
        res = estimate_limit(methods[label], f, settings)
        results[label] = res
        measured[label] = _measure(res)
    return _judge(case, results, tol, measured)


def run_matrix(cases: list[VerificationCase], settings: Settings = DEFAULT,
               jobs: int = 1) -> VerificationReport:
    """Evaluate every case and collect an append-only pass/fail report.

    Cases are independent, so ``jobs > 1`` farms them out to worker processes.
    """
    functions = corpus_map()
    methods = method_catalog()
    # validate all labels up front so a typo aborts before any evaluation
    for case in cases:
        if (case.function, case.flavor) not in functions:
            raise ConfigError(f"case {case.case_id!r}: unknown function "
                              f"{case.function!r} ({case.flavor.value})")
        for m in case.methods:
            if m not in methods:
                raise ConfigError(f"case {case.case_id!r}: unknown method {m!r}")

    t_start = time.time()
    evals_start = counter.count
    if jobs > 1 and len(cases) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_case, cases,
                                     [settings] * len(cases)))
    else:
        outcomes = [_run_case(case, settings) for case in cases]
    return VerificationReport(outcomes, time.time() - t_start,
                              counter.count - evals_start)


def _judge(case: VerificationCase, results: dict, tol: float,
           measured: dict) -> CaseOutcome:
    if case.expected == "all_agree":
        bad = [lab for lab, r in results.items() if r.status is not Status.CONVERGED]
        if bad:
            return CaseOutcome(case.case_id, False,
                               f"methods did not converge: {bad}", measured)
        target = case.value
        devs = {lab: abs(r.estimate - target) for lab, r in results.items()}
        worst = max(devs.values())
        if worst > tol:
            return CaseOutcome(case.case_id, False,
                               f"max deviation {worst:.3e} exceeds tolerance {tol:.3e}",
                               measured)
        return CaseOutcome(case.case_id, True,
                           f"all converged to {target} (max dev {worst:.3e})", measured)

    lab_a, lab_b = case.methods
    ra, rb = results[lab_a], results[lab_b]
    want_a, want_b = case.statuses
    if ra.status.value != want_a or rb.status.value != want_b:
        return CaseOutcome(case.case_id, False,
                           f"statuses ({ra.status.value}, {rb.status.value}) != "
                           f"expected ({want_a}, {want_b})", measured)
    if want_a == "converged" and case.value is not None \
            and abs(ra.estimate - case.value) > tol:
        return CaseOutcome(case.case_id, False,
                           f"{lab_a} converged to {ra.estimate}, not {case.value}",
                           measured)
    osc = rb if want_b == "oscillating" else ra
    if osc.oscillation_amplitude <= 10.0 * tol:
        return CaseOutcome(case.case_id, False,
                           f"oscillation amplitude {osc.oscillation_amplitude:.3e} "
                           f"too small to certify separation", measured)
    return CaseOutcome(case.case_id, True, "separation confirmed", measured)
