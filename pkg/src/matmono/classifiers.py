"""Order-n monotonicity/convexity classification with re-checkable certificates.

Every FAIL verdict carries a certificate whose margin can be recomputed from
the payload alone (no RNG state): a node tuple for divided-difference
criteria, a matrix pair for sampling criteria, a dual vector or a discrete
measure for interpolation feasibility.  Detected violations are polished by
coordinate descent until the margin clears the reporting floor, so verdicts
are never decided inside rounding noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .divdiff import kraus_matrix, local_criterion_matrix, loewner_matrix
from .funcmodel import FunctionSpec, IntervalSpec, parse_function
from .matcore import apply_function, psd_check, spectral_norm

DEFAULT_TOL = 1e-9
MARGIN_FLOOR = 1e-6          # polished FAIL margins must clear this
CN_DEFAULT_TOL = 1e-7        # relative feasibility residual
CN_DEFAULT_GRID = 256
SCHEMA_VERSION = "v1"

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"

__all__ = [
    "Certificate",
    "ClassReport",
    "DiscreteMeasure",
    "RecheckResult",
    "PASS",
    "FAIL",
    "INCONCLUSIVE",
    "MARGIN_FLOOR",
    "is_n_monotone_dd",
    "is_n_monotone_mx",
    "is_n_convex",
    "is_n_concave",
    "local_two_by_two_report",
    "cn_membership",
    "cn_class_scan",
    "cn_operator_check",
    "cn_kernel",
    "cn_grid",
    "recheck_certificate",
]


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

def _encode_matrix(m) -> object:
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return {"re": m.real.tolist(), "im": m.imag.tolist()}
    return m.tolist()


def _decode_matrix(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return np.asarray(obj, dtype=float)


@dataclass
class Certificate:
    """Self-contained evidence for a verdict, re-checkable without RNG state."""

    kind: str                # node_tuple | matrix_pair | jensen_pair | infeasible_dual | measure
    check: str               # which criterion recomputes the margin
    function: str            # mini-language text
    interval: str            # IntervalSpec text
    order: int
    margin: float
    payload: dict
    tolerance: float = DEFAULT_TOL
    schema: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "kind": self.kind,
            "check": self.check,
            "function": self.function,
            "interval": self.interval,
            "order": self.order,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        if d.get("schema") != SCHEMA_VERSION:
            raise ValueError(
                f"certificate schema {d.get('schema')!r} does not match {SCHEMA_VERSION!r}"
            )
        return cls(
            kind=d["kind"],
            check=d["check"],
            function=d["function"],
            interval=d["interval"],
            order=int(d["order"]),
            margin=float(d["margin"]),
            payload=d["payload"],
            tolerance=float(d.get("tolerance", DEFAULT_TOL)),
        )


@dataclass
class ClassReport:
    """Aggregated verdict for (function, interval, order) on one route."""

    function: str
    interval: str
    order: int
    verdict: str
    route: str
    trials: int
    tolerance: float
    seed: int
    certificate: Certificate | None = None

    def to_dict(self) -> dict:
        d = {
            "type": "class_report",
            "function": self.function,
            "interval": self.interval,
            "order": self.order,
            "verdict": self.verdict,
            "route": self.route,
            "trials": self.trials,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }
        d["certificate"] = self.certificate.to_dict() if self.certificate else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClassReport":
        cert = d.get("certificate")
        return cls(
            function=d["function"],
            interval=d["interval"],
            order=int(d["order"]),
            verdict=d["verdict"],
            route=d["route"],
            trials=int(d["trials"]),
            tolerance=float(d["tolerance"]),
            seed=int(d["seed"]),
            certificate=Certificate.from_dict(cert) if cert else None,
        )


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative weights on an increasing grid; the last point may be inf."""

    grid: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if g.shape != w.shape:
            raise ValueError("grid and weights must have equal length")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class RecheckResult:
    ok: bool
    margin: float
    hypothesis_ok: bool
    details: str


# ---------------------------------------------------------------------------
# shared search machinery
# ---------------------------------------------------------------------------

def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _min_eig(m) -> float:
    return float(np.linalg.eigvalsh(m)[0])


def _interval_clip(nodes: np.ndarray, interval: IntervalSpec) -> np.ndarray:
    out = np.asarray(nodes, dtype=float).copy()
    if math.isfinite(interval.lower):
        eps = max(1e-12, 1e-12 * abs(interval.lower))
        out = np.maximum(out, interval.lower + eps)
    if math.isfinite(interval.upper):
        eps = max(1e-12, 1e-12 * abs(interval.upper))
        out = np.minimum(out, interval.upper - eps)
    return out


NODE_MIN_GAP_REL = 1e-4


def _canonical_nodes(nodes, min_gap_rel: float = NODE_MIN_GAP_REL) -> np.ndarray:
    """Snap node tuples onto the numerically safe lattice.

    Pairwise gaps below ``min_gap_rel * scale`` collapse to exact
    coincidence (cluster mean), which the divided-difference tableau resolves
    through the exact derivative rule; surviving gaps are wide enough that
    the value recursion keeps cancellation error orders of magnitude below
    the certificate margin floor.  Positions keep their original order.
    """
    ts = np.asarray(nodes, dtype=float)
    order = np.argsort(ts, kind="stable")
    srt = ts[order]
    gap = min_gap_rel * max(1.0, float(np.max(np.abs(srt))))
    merged = np.empty_like(srt)
    start = 0
    for i in range(1, len(srt) + 1):
        if i == len(srt) or srt[i] - srt[i - 1] >= gap:
            merged[start:i] = float(np.mean(srt[start:i]))
            start = i
    out = np.empty_like(ts)
    out[order] = merged
    return out


def stress_node_tuples(interval: IntervalSpec, n: int) -> list[np.ndarray]:
    """Deterministic stress tuples: spread, clustered and endpoint-adjacent."""
    def pts(qs):
        return np.array([interval.interior_point(min(max(q, 1e-9), 1 - 1e-9)) for q in qs])

    tuples = [pts(np.linspace(0.15, 0.85, n)), pts(np.linspace(0.02, 0.98, n))]
    for q0 in (0.2, 0.5, 0.8):
        t0 = interval.interior_point(q0)
        scale = max(1e-6, abs(t0)) if not interval.is_finite else interval.width
        for h in (1e-9, 1e-7, 1e-5, 1e-3):
            tuples.append(_interval_clip(t0 + h * scale * np.arange(n), interval))
    for base in (1e-5, 1e-4, 1e-3, 1e-2):
        tuples.append(pts([base * 3.0**k for k in range(n)]))
        tuples.append(pts([1.0 - base * 3.0**k for k in range(n)]))
        if n > 1:
            tuples.append(pts([base] + list(np.linspace(0.3, 0.8, n - 1))))
    return tuples


def _sample_tuple(interval: IntervalSpec, n: int, rng) -> np.ndarray:
    u = rng.uniform()
    if u < 0.15 and n > 1:
        q0 = rng.uniform(0.05, 0.95)
        t0 = interval.interior_point(q0)
        scale = interval.width if interval.is_finite else max(1e-3, abs(t0))
        h = 10.0 ** rng.uniform(-9, -1)
        return _interval_clip(t0 + h * scale * rng.uniform(0, 1, n), interval)
    if u < 0.3:
        return interval.interior_sample(rng, n, margin=1e-6)
    return interval.interior_sample(rng, n, margin=1e-3)


def _coordinate_descent(objective, x0, step0, lower=None, upper=None,
                        rounds=40, target=None):
    """Minimize objective by per-coordinate probes with shrinking steps."""
    x = np.asarray(x0, dtype=float).copy()
    best = objective(x)
    step = np.asarray(step0, dtype=float).copy()
    for _ in range(rounds):
        improved = False
        for i in range(len(x)):
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sgn * step[i]
                if lower is not None:
                    trial[i] = max(trial[i], lower[i])
                if upper is not None:
                    trial[i] = min(trial[i], upper[i])
                val = objective(trial)
                if val < best - 1e-18:
                    x, best = trial, val
                    improved = True
                    break
        if not improved:
            step *= 0.5
            if np.all(step < 1e-13):
                break
        if target is not None and best <= target:
            break
    return x, best


def _node_bounds(interval: IntervalSpec, m: int):
    lo = None
    hi = None
    if math.isfinite(interval.lower):
        lo = np.full(m, interval.lower + max(1e-12, 1e-12 * abs(interval.lower)))
    if math.isfinite(interval.upper):
        hi = np.full(m, interval.upper - max(1e-12, 1e-12 * abs(interval.upper)))
    return lo, hi


def _node_steps(nodes: np.ndarray, interval: IntervalSpec) -> np.ndarray:
    if interval.is_finite:
        return np.full(len(nodes), interval.width / 8.0)
    return np.maximum(1.0, np.abs(nodes)) / 4.0


# ---------------------------------------------------------------------------
# divided-difference routes
# ---------------------------------------------------------------------------

def _criterion_margin(f, nodes, kind, s=None) -> float:
    if kind == "loewner":
        return _min_eig(loewner_matrix(f, nodes).entries)
    if kind == "kraus":
        return _min_eig(kraus_matrix(f, nodes, s).entries)
    raise ValueError(kind)


def _polish_loewner(f, interval, nodes) -> tuple[np.ndarray, float]:
    def objective(x):
        return _criterion_margin(f, _canonical_nodes(_interval_clip(x, interval)), "loewner")

    lo, hi = _node_bounds(interval, len(nodes))
    x, m = _coordinate_descent(objective, nodes, _node_steps(np.asarray(nodes), interval),
                               lower=lo, upper=hi)
    return _canonical_nodes(_interval_clip(x, interval)), m


def _report(f, interval, n, verdict, route, trials, tol, seed, cert=None) -> ClassReport:
    return ClassReport(
        function=f.text(),
        interval=interval.text(),
        order=n,
        verdict=verdict,
        route=route,
        trials=trials,
        tolerance=tol,
        seed=seed,
        certificate=cert,
    )


def is_n_monotone_dd(f: FunctionSpec, interval: IntervalSpec, n: int,
                     trials: int = 400, seed: int = 0,
                     tol: float = DEFAULT_TOL) -> ClassReport:
    """Loewner-matrix criterion: PSD over sampled n-node tuples.

    FAIL returns a node-tuple certificate polished below the margin floor;
    PASS means no polishable violation was found across ``trials`` random
    tuples plus the deterministic stress tuples.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    rng = _rng(seed)
    candidates = stress_node_tuples(interval, n)
    candidates += [_sample_tuple(interval, n, rng) for _ in range(trials)]

    worst = (math.inf, None)
    for nodes in candidates:
        nodes = _canonical_nodes(nodes)
        crit = loewner_matrix(f, nodes)
        verdict = psd_check(crit.entries, tol)
        if verdict.min_eigenvalue < worst[0]:
            worst = (verdict.min_eigenvalue, np.asarray(nodes, dtype=float))
        if not verdict.is_psd:
            polished, margin = _polish_loewner(f, interval, nodes)
            if margin <= -MARGIN_FLOOR:
                cert = Certificate(
                    kind="node_tuple", check="loewner_dd", function=f.text(),
                    interval=interval.text(), order=n, margin=margin,
                    payload={"nodes": polished.tolist()}, tolerance=tol,
                )
                return _report(f, interval, n, FAIL, "loewner_dd", trials, tol, seed, cert)
    if worst[1] is not None:
        polished, margin = _polish_loewner(f, interval, worst[1])
        if margin <= -MARGIN_FLOOR:
            cert = Certificate(
                kind="node_tuple", check="loewner_dd", function=f.text(),
                interval=interval.text(), order=n, margin=margin,
                payload={"nodes": polished.tolist()}, tolerance=tol,
            )
            return _report(f, interval, n, FAIL, "loewner_dd", trials, tol, seed, cert)
    return _report(f, interval, n, PASS, "loewner_dd", trials, tol, seed)


def _polish_kraus(f, interval, nodes, s) -> tuple[np.ndarray, float, float]:
    m = len(nodes)

    def objective(x):
        xs = _canonical_nodes(_interval_clip(x, interval))
        return _criterion_margin(f, xs[:m], "kraus", s=xs[m])

    x0 = np.append(np.asarray(nodes, dtype=float), s)
    lo, hi = _node_bounds(interval, m + 1)
    x, margin = _coordinate_descent(objective, x0, _node_steps(x0, interval),
                                    lower=lo, upper=hi)
    x = _canonical_nodes(_interval_clip(x, interval))
    return x[:m], float(x[m]), margin


def _kraus_route(f, interval, n, trials, seed, tol) -> ClassReport:
    rng = _rng(seed)
    candidates: list[tuple[np.ndarray, float]] = []
    for tup in stress_node_tuples(interval, n + 1):
        candidates.append((tup[:n], float(tup[-1])))
    for _ in range(trials):
        candidates.append(
            (_sample_tuple(interval, n, rng), float(interval.interior_sample(rng, 1)[0]))
        )

    worst = (math.inf, None)
    for nodes, s in candidates:
        joint = _canonical_nodes(np.append(np.asarray(nodes, dtype=float), s))
        nodes, s = joint[:n], float(joint[n])
        crit = kraus_matrix(f, nodes, s)
        verdict = psd_check(crit.entries, tol)
        if verdict.min_eigenvalue < worst[0]:
            worst = (verdict.min_eigenvalue, (np.asarray(nodes, dtype=float), s))
        if not verdict.is_psd:
            pn, ps, margin = _polish_kraus(f, interval, nodes, s)
            if margin <= -MARGIN_FLOOR:
                cert = Certificate(
                    kind="node_tuple", check="kraus_dd", function=f.text(),
                    interval=interval.text(), order=n, margin=margin,
                    payload={"nodes": pn.tolist(), "s": ps}, tolerance=tol,
                )
                return _report(f, interval, n, FAIL, "kraus_dd", trials, tol, seed, cert)
    if worst[1] is not None:
        pn, ps, margin = _polish_kraus(f, interval, worst[1][0], worst[1][1])
        if margin <= -MARGIN_FLOOR:
            cert = Certificate(
                kind="node_tuple", check="kraus_dd", function=f.text(),
                interval=interval.text(), order=n, margin=margin,
                payload={"nodes": pn.tolist(), "s": ps}, tolerance=tol,
            )
            return _report(f, interval, n, FAIL, "kraus_dd", trials, tol, seed, cert)
    return _report(f, interval, n, PASS, "kraus_dd", trials, tol, seed)


def local_two_by_two_report(f: FunctionSpec, interval: IntervalSpec, kind: str,
                            trials: int = 400, seed: int = 0,
                            tol: float = DEFAULT_TOL) -> ClassReport:
    """Pointwise 2x2 derivative criterion scan (local_monotone/local_convex)."""
    rng = _rng(seed)
    order = 2
    points = [interval.interior_point(q) for q in
              (1e-6, 1e-4, 1e-2, 0.1, 0.25, 0.5, 0.75, 0.9, 1 - 1e-2, 1 - 1e-4)]
    points += list(interval.interior_sample(rng, trials, margin=1e-6))

    def margin_at(t):
        return _min_eig(local_criterion_matrix(f, float(t), kind).entries)

    def polish(t0):
        lo, hi = _node_bounds(interval, 1)
        x, m = _coordinate_descent(
            lambda x: margin_at(_interval_clip(x, interval)[0]),
            np.array([t0]), _node_steps(np.array([t0]), interval),
            lower=lo, upper=hi)
        return float(_interval_clip(x, interval)[0]), m

    worst = (math.inf, None)
    for t in points:
        m = margin_at(t)
        if m < worst[0]:
            worst = (m, t)
        scale = max(1.0, abs(m))
        if m < -tol * scale:
            pt, margin = polish(t)
            if margin <= -MARGIN_FLOOR:
                cert = Certificate(
                    kind="node_tuple", check=kind, function=f.text(),
                    interval=interval.text(), order=order, margin=margin,
                    payload={"t": pt}, tolerance=tol,
                )
                return _report(f, interval, order, FAIL, "local2x2", trials, tol, seed, cert)
    if worst[1] is not None:
        pt, margin = polish(worst[1])
        if margin <= -MARGIN_FLOOR:
            cert = Certificate(
                kind="node_tuple", check=kind, function=f.text(),
                interval=interval.text(), order=order, margin=margin,
                payload={"t": pt}, tolerance=tol,
            )
            return _report(f, interval, order, FAIL, "local2x2", trials, tol, seed, cert)
    return _report(f, interval, order, PASS, "local2x2", trials, tol, seed)


# ---------------------------------------------------------------------------
# matrix-pair routes
# ---------------------------------------------------------------------------

def _diag_bump_margin(f, nodes, v, eps, interval) -> float | None:
    """min eig of f(B) - f(A) for A = diag(nodes), B = A + eps vv^T."""
    nodes = np.asarray(nodes, dtype=float)
    a_vals = np.asarray(f(nodes), dtype=float)
    b = np.diag(nodes) + eps * np.outer(v, v)
    w, q = np.linalg.eigh(b)
    if not all(interval.interior_contains(x) for x in w):
        return None
    fb = (q * np.asarray(f(w), dtype=float)) @ q.T
    return _min_eig(fb - np.diag(a_vals))


def _eps_ceiling(nodes, interval) -> float:
    if math.isfinite(interval.upper):
        room = interval.upper - float(np.max(nodes))
        return max(room * 0.95, 1e-12)
    return 10.0 * max(1.0, float(np.max(np.abs(nodes))))


def _bump_certificate_matrices(nodes, v, eps):
    a = np.diag(np.asarray(nodes, dtype=float))
    return a, a + eps * np.outer(v, v)


def _polish_bump(f, interval, nodes, v, eps):
    """Descend over (nodes, direction, log eps) for the rank-one bump family."""
    n = len(nodes)

    def objective(x):
        xs = _interval_clip(x[:n], interval)
        vv = x[n : 2 * n]
        nv = np.linalg.norm(vv)
        if nv < 1e-12:
            return math.inf
        vv = vv / nv
        ee = math.exp(x[-1])
        ee = min(ee, _eps_ceiling(xs, interval))
        m = _diag_bump_margin(f, xs, vv, ee, interval)
        return math.inf if m is None else m

    x0 = np.concatenate([nodes, v, [math.log(max(eps, 1e-12))]])
    steps = np.concatenate([_node_steps(np.asarray(nodes), interval),
                            np.full(n, 0.3), [0.7]])
    x, margin = _coordinate_descent(objective, x0, steps, rounds=35)
    xs = _interval_clip(x[:n], interval)
    vv = x[n : 2 * n]
    vv = vv / np.linalg.norm(vv)
    ee = min(math.exp(x[-1]), _eps_ceiling(xs, interval))
    return xs, vv, ee, margin


def is_n_monotone_mx(f: FunctionSpec, interval: IntervalSpec, n: int,
                     trials: int = 400, seed: int = 0,
                     tol: float = DEFAULT_TOL) -> ClassReport:
    """Matrix-pair route: check f(a) <= f(b) over sampled ordered pairs.

    Alternates generic random ordered pairs with a structured family
    A = diag(nodes), B = A + eps vv^T whose small-eps behaviour mirrors the
    Loewner criterion, so the two routes fail together.
    """
    from .matcore import random_ordered_pair

    if n < 1:
        raise ValueError("order must be >= 1")
    rng = _rng(seed)

    def fail_report(a, b, margin):
        cert = Certificate(
            kind="matrix_pair", check="monotone_pairs", function=f.text(),
            interval=interval.text(), order=n, margin=margin,
            payload={"a": _encode_matrix(a), "b": _encode_matrix(b)}, tolerance=tol,
        )
        return _report(f, interval, n, FAIL, "matrix_pairs", trials, tol, seed, cert)

    eps_ladder = (0.5, 0.1, 0.02, 3e-3, 3e-4, 3e-5)
    worst_bump = (math.inf, None)
    worst_pair = (math.inf, None)

    gen_tuples = stress_node_tuples(interval, n)
    for i in range(trials):
        if i % 3 == 0:
            a, b = random_ordered_pair(n, interval, rng)
            m = _min_eig(apply_function(f, b) - apply_function(f, a))
            if m < worst_pair[0]:
                worst_pair = (m, (a, b))
        else:
            if i < 3 * len(gen_tuples) and i % 3 == 1:
                nodes = gen_tuples[i // 3]
            else:
                nodes = _sample_tuple(interval, n, rng)
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            ceil = _eps_ceiling(nodes, interval)
            for frac in eps_ladder:
                m = _diag_bump_margin(f, nodes, v, frac * ceil, interval)
                if m is not None and m < worst_bump[0]:
                    worst_bump = (m, (np.asarray(nodes, float), v.copy(), frac * ceil))

    scale = max(1.0, abs(worst_bump[0]) if worst_bump[1] else 1.0,
                abs(worst_pair[0]) if worst_pair[1] else 1.0)
    threshold = -tol * scale
    if worst_bump[1] is not None:
        nodes, v, eps = worst_bump[1]
        xs, vv, ee, margin = _polish_bump(f, interval, nodes, v, eps)
        if margin <= -MARGIN_FLOOR:
            a, b = _bump_certificate_matrices(xs, vv, ee)
            return fail_report(a, b, margin)
    if worst_pair[1] is not None and worst_pair[0] < threshold:
        a, b = worst_pair[1]
        gap = b - a
        best = (worst_pair[0], a, b)
        for s in (0.25, 0.5, 2.0, 4.0):
            bb = a + s * gap
            if all(interval.interior_contains(x) for x in np.linalg.eigvalsh(bb)):
                m = _min_eig(apply_function(f, bb) - apply_function(f, a))
                if m < best[0]:
                    best = (m, a, bb)
        if best[0] <= -MARGIN_FLOOR:
            return fail_report(best[1], best[2], best[0])
    return _report(f, interval, n, PASS, "matrix_pairs", trials, tol, seed)


def _convex_pair_margin(f, a, b, lam) -> float:
    mid = lam * a + (1.0 - lam) * b
    lhs = apply_function(f, mid)
    rhs = lam * apply_function(f, a) + (1.0 - lam) * apply_function(f, b)
    return _min_eig(rhs - lhs)


def _convex_mx_route(f, interval, n, trials, seed, tol) -> ClassReport:
    from .matcore import random_matrix_in

    rng = _rng(seed)

    def fail_report(a, b, lam, margin):
        cert = Certificate(
            kind="matrix_pair", check="convex_pairs", function=f.text(),
            interval=interval.text(), order=n, margin=margin,
            payload={"a": _encode_matrix(a), "b": _encode_matrix(b), "lam": lam},
            tolerance=tol,
        )
        return _report(f, interval, n, FAIL, "matrix_pairs", trials, tol, seed, cert)

    worst = (math.inf, None)
    for i in range(trials):
        if i % 2 == 0:
            a = random_matrix_in(n, interval, rng)
            b = random_matrix_in(n, interval, rng)
            lam = 0.5 if i % 4 == 0 else float(rng.uniform(0.05, 0.95))
        else:
            nodes = _sample_tuple(interval, n, rng)
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            eps = 10.0 ** rng.uniform(-4, 0) * _eps_ceiling(nodes, interval)
            a = np.diag(np.asarray(nodes, dtype=float))
            b = a + eps * np.outer(v, v)
            if not all(interval.interior_contains(x) for x in np.linalg.eigvalsh(b)):
                continue
            lam = 0.5
        m = _convex_pair_margin(f, a, b, lam)
        if m < worst[0]:
            worst = (m, (a, b, lam))

    if worst[1] is not None:
        a, b, lam = worst[1]
        scale = max(1.0, abs(worst[0]))
        if worst[0] < -tol * scale or worst[0] < 0:
            best = (worst[0], a, b, lam)
            for lam2 in (0.25, 0.5, 0.75):
                m = _convex_pair_margin(f, a, b, lam2)
                if m < best[0]:
                    best = (m, a, b, lam2)
            if best[0] <= -MARGIN_FLOOR:
                return fail_report(best[1], best[2], best[3], best[0])
    return _report(f, interval, n, PASS, "matrix_pairs", trials, tol, seed)


def is_n_convex(f: FunctionSpec, interval: IntervalSpec, n: int,
                trials: int = 400, seed: int = 0, tol: float = DEFAULT_TOL,
                route: str = "kraus_dd") -> ClassReport:
    """Order-n convexity by anchored second divided differences, matrix pairs
    or (n=2 only) the pointwise 2x2 derivative criterion."""
    if n < 1:
        raise ValueError("order must be >= 1")
    if route == "kraus_dd":
        return _kraus_route(f, interval, n, trials, seed, tol)
    if route == "matrix_pairs":
        return _convex_mx_route(f, interval, n, trials, seed, tol)
    if route == "local2x2":
        if n != 2:
            raise ValueError("local2x2 route applies to order 2 only")
        return local_two_by_two_report(f, interval, "local_convex", trials, seed, tol)
    raise ValueError(f"unknown convexity route {route!r}")


def is_n_concave(f: FunctionSpec, interval: IntervalSpec, n: int,
                 trials: int = 400, seed: int = 0, tol: float = DEFAULT_TOL,
                 route: str = "kraus_dd") -> ClassReport:
    """Order-n concavity: convexity of -f."""
    from .funcmodel import negate

    return is_n_convex(negate(f), interval, n, trials, seed, tol, route)


# ---------------------------------------------------------------------------
# interpolation-class feasibility
# ---------------------------------------------------------------------------

def cn_grid(grid_size: int = CN_DEFAULT_GRID) -> np.ndarray:
    """Kernel grid t_j = u/(1-u) for u = j/grid_size, plus the infinity atom."""
    u = np.arange(grid_size) / grid_size
    return np.append(u / (1.0 - u), math.inf)


def cn_kernel(grid: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Kernel matrix K[i, j] = (1+t_j) lam_i / (1 + (t_j - 1) lam_i).

    The infinity atom contributes the constant column 1.
    """
    lam = np.asarray(lam, dtype=float)
    k = np.empty((len(lam), len(grid)))
    for j, t in enumerate(grid):
        if math.isinf(t):
            k[:, j] = 1.0
        else:
            k[:, j] = (1.0 + t) * lam / (1.0 + (t - 1.0) * lam)
    return k


def cn_membership(f: FunctionSpec, interval: IntervalSpec, n: int, nodes,
                  grid_size: int = CN_DEFAULT_GRID,
                  tol: float = CN_DEFAULT_TOL) -> ClassReport:
    """Positive-Pick interpolation feasibility at one n-subset of (0,1).

    Solves nonnegative least squares against the compactified kernel grid.
    PASS carries the fitted discrete measure; FAIL carries a dual vector a
    with a^T K >= 0 columnwise and a^T f(S) < 0.
    """
    lam = np.asarray(sorted(float(x) for x in nodes))
    if len(lam) != n:
        raise ValueError(f"expected {n} nodes, got {len(lam)}")
    if len(np.unique(lam)) != n:
        raise ValueError("interpolation nodes must be distinct")
    if interval.lower < 0.0 or interval.upper > 1.0:
        raise ValueError(
            f"kernel feasibility runs on subintervals of [0,1]; transfer "
            f"{interval.text()} first"
        )
    for x in lam:
        if not interval.interior_contains(x):
            raise ValueError(f"node {x!r} not interior to {interval.text()}")
    y = np.asarray(f(lam), dtype=float)
    if np.any(y <= 0.0):
        bad = lam[np.argmin(y)]
        raise ValueError(f"f must be positive on the nodes; f({bad!r}) = {y.min()!r}")

    grid = cn_grid(grid_size)
    kernel = cn_kernel(grid, lam)
    weights, rnorm = nnls(kernel, y)
    rel = rnorm / max(float(np.linalg.norm(y)), 1e-300)
    if rel <= tol:
        support = weights > 0.0
        cert = Certificate(
            kind="measure", check="cn_feasibility", function=f.text(),
            interval=interval.text(), order=n, margin=float(rnorm),
            payload={
                "nodes": lam.tolist(),
                "grid": grid[support].tolist(),
                "weights": weights[support].tolist(),
                "grid_size": grid_size,
            },
            tolerance=tol,
        )
        return _report(f, interval, n, PASS, "cn_feasibility", 1, tol, 0, cert)
    residual = kernel @ weights - y
    dual = residual / np.linalg.norm(residual)
    cert = Certificate(
        kind="infeasible_dual", check="cn_feasibility", function=f.text(),
        interval=interval.text(), order=n, margin=float(dual @ y),
        payload={"nodes": lam.tolist(), "dual": dual.tolist(), "grid_size": grid_size},
        tolerance=tol,
    )
    return _report(f, interval, n, FAIL, "cn_feasibility", 1, tol, 0, cert)


def cn_class_scan(f: FunctionSpec, interval: IntervalSpec, n: int,
                  subsets: int = 20, grid_size: int = CN_DEFAULT_GRID,
                  tol: float = CN_DEFAULT_TOL, seed: int = 0):
    """Aggregate membership over sampled n-subsets: PASS only if all pass."""
    rng = _rng(seed)
    reports = []
    for _ in range(subsets):
        while True:
            lam = np.sort(interval.interior_sample(rng, n, margin=5e-3))
            if np.min(np.diff(lam)) > 1e-4 * interval.width:
                break
        reports.append(cn_membership(f, interval, n, lam, grid_size, tol))
    failures = [r for r in reports if r.verdict == FAIL]
    overall = _report(f, interval, n, FAIL if failures else PASS, "cn_feasibility",
                      subsets, tol, seed,
                      failures[0].certificate if failures else reports[0].certificate)
    return overall, reports


def cn_operator_check(f: FunctionSpec, n: int, trials: int = 400, seed: int = 0,
                      tol: float = DEFAULT_TOL,
                      interval: IntervalSpec = IntervalSpec(0.0, 1.0, False, False),
                      ) -> ClassReport:
    """Sampled operator inequality T*AT <= A  =>  T*f(A)T <= f(A) on (0,1).

    The hypothesis is hit constructively: draw a contraction, then shrink it
    by the largest factor keeping phi(A) - T*phi(A)T positive semidefinite,
    where phi(t) = t/(1-t).  The shrink must run in the phi-transferred
    order: since phi^{-1} is operator monotone on [0, inf) and vanishes at 0,
    that constraint already forces A - T*AT >= 0, while the converse fails
    (there are pairs with T*AT <= A but T*phi(A)T not <= phi(A), and such
    pairs would wrongly flag kernel-representable functions).
    """
    from .funcmodel import transfer
    from .matcore import random_contraction, random_matrix_in, random_projection

    if interval.lower < 0.0 or interval.upper > 1.0:
        raise ValueError("operator check samples spectra inside (0,1)")
    rng = _rng(seed)
    phi = transfer(IntervalSpec(0.0, 1.0, False, False))

    def shrink(phi_a, t0):
        m = t0.conj().T @ phi_a @ t0
        if _min_eig(phi_a - m) >= 0.0:
            return 1.0
        lo_b, hi_b = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo_b + hi_b)
            if _min_eig(phi_a - mid * mid * m) >= 0.0:
                lo_b = mid
            else:
                hi_b = mid
        return lo_b

    def margin_of(a, t):
        fa = apply_function(f, a)
        return _min_eig(fa - t.conj().T @ fa @ t)

    worst = (math.inf, None)
    for i in range(trials):
        a = random_matrix_in(n, interval, rng)
        phi_a = apply_function(phi, a)
        if i == 0:
            t0 = np.eye(n)
        elif i == 1:
            t0 = np.zeros((n, n))
        elif i % 5 == 2:
            t0 = random_projection(n, rng)
        else:
            t0 = random_contraction(n, rng)
        beta = shrink(phi_a, t0)
        if i % 2 == 0:
            beta *= float(rng.uniform(0.2, 1.0))
        t = beta * t0
        m = margin_of(a, t)
        if m < worst[0]:
            worst = (m, (a, t))

    margin, pair = worst
    scale = max(1.0, abs(margin))
    if pair is not None and margin < -tol * scale and margin <= -MARGIN_FLOOR:
        a, t = pair
        cert = Certificate(
            kind="jensen_pair", check="jensen_operator", function=f.text(),
            interval=interval.text(), order=n, margin=margin,
            payload={"a": _encode_matrix(a), "t": _encode_matrix(t)}, tolerance=tol,
        )
        return _report(f, interval, n, FAIL, "jensen_operator", trials, tol, seed, cert)
    return _report(f, interval, n, PASS, "jensen_operator", trials, tol, seed)


# ---------------------------------------------------------------------------
# certificate recheck
# ---------------------------------------------------------------------------

def _cert_function(cert: Certificate) -> tuple[FunctionSpec, IntervalSpec]:
    interval = IntervalSpec.parse(cert.interval)
    return parse_function(cert.function, domain=interval), interval


def recheck_certificate(cert: Certificate | dict) -> RecheckResult:
    """Recompute a certificate's margin from its payload alone."""
    if isinstance(cert, dict):
        cert = Certificate.from_dict(cert)
    f, interval = _cert_function(cert)
    payload = cert.payload
    check = cert.check

    if check == "loewner_dd":
        margin = _min_eig(loewner_matrix(f, payload["nodes"]).entries)
        return _fail_result(margin, True, "loewner matrix minimum eigenvalue")
    if check == "kraus_dd":
        margin = _min_eig(kraus_matrix(f, payload["nodes"], payload["s"]).entries)
        return _fail_result(margin, True, "kraus matrix minimum eigenvalue")
    if check in ("local_monotone", "local_convex"):
        margin = _min_eig(local_criterion_matrix(f, payload["t"], check).entries)
        return _fail_result(margin, True, f"{check} matrix minimum eigenvalue")
    if check == "value_at_zero":
        margin = -float(f(0.0))
        return _fail_result(margin, True, "f(0) <= 0 check (margin = -f(0))")
    if check == "monotone_pairs":
        a, b = _decode_matrix(payload["a"]), _decode_matrix(payload["b"])
        hyp = _min_eig(b - a) >= -1e-10 * max(1.0, spectral_norm(b))
        margin = _min_eig(apply_function(f, b) - apply_function(f, a))
        return _fail_result(margin, hyp, "min eig of f(b) - f(a) under a <= b")
    if check == "convex_pairs":
        a, b = _decode_matrix(payload["a"]), _decode_matrix(payload["b"])
        margin = _convex_pair_margin(f, a, b, float(payload["lam"]))
        return _fail_result(margin, True, "convex combination margin")
    if check in ("jensen_contraction", "jensen_projection"):
        a, c = _decode_matrix(payload["a"]), _decode_matrix(payload["c"])
        hyp = float(np.linalg.svd(c, compute_uv=False)[0]) <= 1.0 + 1e-10
        if check == "jensen_projection":
            hyp = hyp and bool(np.allclose(c @ c, c, atol=1e-8))
        fa = apply_function(f, a)
        inner = c.conj().T @ a @ c
        margin = _min_eig(c.conj().T @ fa @ c - apply_function(f, inner))
        return _fail_result(margin, hyp, "min eig of c*f(a)c - f(c*ac)")
    if check == "jensen_two_contractions":
        a = _decode_matrix(payload["a"])
        b = _decode_matrix(payload["b"])
        c = _decode_matrix(payload["c"])
        d = _decode_matrix(payload["d"])
        stack = np.vstack([c, d])
        hyp = float(np.linalg.svd(stack, compute_uv=False)[0]) <= 1.0 + 1e-10
        lhs = apply_function(f, c.conj().T @ a @ c + d.conj().T @ b @ d)
        rhs = c.conj().T @ apply_function(f, a) @ c + d.conj().T @ apply_function(f, b) @ d
        margin = _min_eig(rhs - lhs)
        return _fail_result(margin, hyp, "two-contraction inequality margin")
    if check == "jensen_operator":
        from .funcmodel import transfer

        a, t = _decode_matrix(payload["a"]), _decode_matrix(payload["t"])
        phi_a = apply_function(transfer(IntervalSpec(0.0, 1.0, False, False)), a)
        hyp = (
            _min_eig(a - t.conj().T @ a @ t) >= -1e-10 * max(1.0, spectral_norm(a))
            and _min_eig(phi_a - t.conj().T @ phi_a @ t)
            >= -1e-9 * max(1.0, spectral_norm(phi_a))
            and float(np.linalg.svd(t, compute_uv=False)[0]) <= 1.0 + 1e-10
        )
        fa = apply_function(f, a)
        margin = _min_eig(fa - t.conj().T @ fa @ t)
        return _fail_result(margin, hyp, "min eig of f(A) - T*f(A)T")
    if check == "cn_feasibility" and cert.kind == "infeasible_dual":
        lam = np.asarray(payload["nodes"], dtype=float)
        dual = np.asarray(payload["dual"], dtype=float)
        kernel = cn_kernel(cn_grid(int(payload["grid_size"])), lam)
        col_min = float(np.min(dual @ kernel))
        margin = float(dual @ np.asarray(f(lam), dtype=float))
        ok = margin < -cert.tolerance and col_min >= -1e-7
        return RecheckResult(ok, margin, col_min >= -1e-7,
                             f"dual: a^T f(S) = {margin:.3e}, min col a^T K = {col_min:.3e}")
    if check == "cn_feasibility" and cert.kind == "measure":
        lam = np.asarray(payload["nodes"], dtype=float)
        grid = np.asarray(payload["grid"], dtype=float)
        weights = np.asarray(payload["weights"], dtype=float)
        measure = DiscreteMeasure(grid, weights)   # validates shape and signs
        kernel = cn_kernel(measure.grid, lam)
        residual = float(np.linalg.norm(kernel @ measure.weights - np.asarray(f(lam))))
        ok = residual <= cert.tolerance * max(float(np.linalg.norm(f(lam))), 1e-300) * 4.0
        return RecheckResult(ok, residual, True,
                             f"measure reproduces f(S) with residual {residual:.3e}")
    raise ValueError(f"unknown certificate check {check!r}")


def _fail_result(margin: float, hypothesis_ok: bool, details: str) -> RecheckResult:
    ok = hypothesis_ok and margin < -MARGIN_FLOOR * 0.5
    return RecheckResult(ok, float(margin), hypothesis_ok, details)
