"""Symbolic real functions on intervals with exact derivatives of any order.

Every function kind evaluates through closed formulas, and k-th derivatives
come from exact Taylor jets (structural product/chain/quotient rules), never
from finite differences.  A text mini-language round-trips each spec so that
reports and certificates can embed the function identity:

    poly:c0,c1,...   moebius:a,b,c,d   gap:n   sqrt  log  exp  recip
    compose(F;G)     quot(F)           shift0(F)     integ(F;x0)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

SNAP_EPS = 1e-10

__all__ = [
    "DomainError",
    "UnsupportedOperationError",
    "ParseError",
    "IntervalSpec",
    "FunctionSpec",
    "Polynomial",
    "Moebius",
    "Sqrt",
    "Log",
    "Exp",
    "Reciprocal",
    "Composition",
    "QuotientByT",
    "ShiftedToZero",
    "AntiderivativeSpec",
    "affine",
    "transfer",
    "transfer_inverse",
    "transfer_map",
    "invert",
    "quotient_by_t",
    "shifted_to_zero",
    "antiderivative",
    "gap_polynomial",
    "negate",
    "parse_function",
]


class DomainError(ValueError):
    """Evaluation outside a function's domain."""


class UnsupportedOperationError(ValueError):
    """Requested transform has no closed form for this function kind."""


class ParseError(ValueError):
    """Mini-language syntax error, carrying the offending position."""

    def __init__(self, message, position, expected=None):
        self.position = position
        self.expected = expected
        suffix = f", expected {expected}" if expected else ""
        super().__init__(f"{message} at position {position}{suffix}")


def _fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


@dataclass(frozen=True)
class IntervalSpec:
    """Real interval with independently open/closed finite endpoints."""

    lower: float
    upper: float
    lower_closed: bool = True
    upper_closed: bool = False

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if not lo < hi:
            raise ValueError(f"interval needs lower < upper, got [{lo}, {hi}]")
        if math.isinf(lo) and self.lower_closed:
            raise ValueError("-inf endpoint cannot be closed")
        if math.isinf(hi) and self.upper_closed:
            raise ValueError("+inf endpoint cannot be closed")

    # -- textual form -----------------------------------------------------
    def text(self) -> str:
        lb = "[" if self.lower_closed else "("
        ub = "]" if self.upper_closed else ")"
        return f"{lb}{_fmt(self.lower)},{_fmt(self.upper)}{ub}"

    @classmethod
    def parse(cls, s: str) -> "IntervalSpec":
        """Parse ``[0,1)`` style text; bare ``lo,hi`` means ``[lo,hi)``."""
        s = s.strip().replace(" ", "")
        lc, uc = True, False
        if s[:1] in "[(":
            lc = s[0] == "["
            if s[-1:] not in ")]":
                raise ValueError(f"unbalanced interval brackets in {s!r}")
            uc = s[-1] == "]"
            s = s[1:-1]
        parts = s.split(",")
        if len(parts) != 2:
            raise ValueError(f"interval must be 'lo,hi', got {s!r}")
        return cls(float(parts[0]), float(parts[1]), lc, uc)

    # -- geometry ----------------------------------------------------------
    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def _edge_eps(self, endpoint: float) -> float:
        return SNAP_EPS * max(1.0, abs(endpoint))

    def contains(self, t: float) -> bool:
        if t < self.lower or (t == self.lower and not self.lower_closed):
            return False
        if t > self.upper or (t == self.upper and not self.upper_closed):
            return False
        return True

    def interior_contains(self, t: float) -> bool:
        return self.lower < t < self.upper

    def snap(self, t):
        """Pull values within 1e-10 of an endpoint back inside the interval.

        Valid interior points are left untouched; only boundary-grazing or
        just-outside values move.  Works on scalars and arrays.
        """
        arr = np.asarray(t, dtype=float)
        out = arr.copy()
        if math.isfinite(self.lower):
            eps = self._edge_eps(self.lower)
            tgt = self.lower if self.lower_closed else self.lower + eps
            low = arr <= (self.lower if self.lower_closed else self.lower + 0.0)
            near = low & (self.lower - arr <= eps)
            out = np.where(near, tgt, out)
        if math.isfinite(self.upper):
            eps = self._edge_eps(self.upper)
            tgt = self.upper if self.upper_closed else self.upper - eps
            high = arr >= self.upper
            near = high & (arr - self.upper <= eps)
            out = np.where(near, tgt, out)
        if np.isscalar(t) or np.ndim(t) == 0:
            return float(out)
        return out

    def interior_point(self, q: float) -> float:
        """Map a quantile q in (0,1) to an interior point (handles infinities)."""
        if not 0.0 < q < 1.0:
            raise ValueError("quantile must be in (0,1)")
        lo, hi = self.lower, self.upper
        if self.is_finite:
            return lo + q * (hi - lo)
        if math.isfinite(lo):          # [lo, inf)
            return lo + q / (1.0 - q)
        if math.isfinite(hi):          # (-inf, hi]
            return hi - (1.0 - q) / q
        return math.tan(math.pi * (q - 0.5))

    def interior_sample(self, rng, size: int, margin: float = 1e-3):
        """Draw interior points, keeping a relative margin off finite endpoints."""
        u = rng.uniform(margin, 1.0 - margin, size=size)
        return np.array([self.interior_point(q) for q in u])


# ---------------------------------------------------------------------------
# function kinds
# ---------------------------------------------------------------------------

_REAL_LINE = IntervalSpec(-math.inf, math.inf, False, False)


class FunctionSpec:
    """Base class: immutable function on an interval with exact jets.

    Subclasses implement ``_value`` (raw evaluation, scalar or array),
    ``_jet`` (Taylor coefficients ``f^(j)(t)/j!`` for j=0..order) and
    ``text`` (mini-language form).
    """

    domain: IntervalSpec

    # -- contract helpers ---------------------------------------------------
    def _gate(self, t):
        snapped = self.domain.snap(t)
        arr = np.atleast_1d(np.asarray(snapped, dtype=float))
        for v in arr:
            if not self.domain.contains(v):
                raise DomainError(
                    f"t={v!r} outside domain {self.domain.text()} of {self.text()}"
                )
        return snapped

    def __call__(self, t):
        return self._value(self._gate(t))

    def derivative(self, t: float, k: int = 1) -> float:
        """Exact k-th derivative at an interior point."""
        if k < 0:
            raise ValueError("derivative order must be >= 0")
        t = float(self.domain.snap(t))
        if not self.domain.interior_contains(t):
            raise DomainError(
                f"derivative needs interior point, t={t!r} in {self.domain.text()}"
            )
        return float(self._jet(t, k)[k]) * math.factorial(k)

    def jet(self, t: float, order: int) -> np.ndarray:
        """Taylor coefficients f^(j)(t)/j! for j = 0..order at interior t."""
        t = float(self.domain.snap(t))
        if not self.domain.interior_contains(t):
            raise DomainError(
                f"jet needs interior point, t={t!r} in {self.domain.text()}"
            )
        return self._jet(t, order)

    # -- to be provided by subclasses ---------------------------------------
    def _value(self, t):  # pragma: no cover - abstract
        raise NotImplementedError

    def _jet(self, t: float, order: int) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def text(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def with_domain(self, interval: IntervalSpec) -> "FunctionSpec":
        raise NotImplementedError

    def validate_on(self, interval: IntervalSpec) -> None:
        """Check hard constraints (poles, sign restrictions) on an interval."""

    def __repr__(self):
        return f"<{type(self).__name__} {self.text()} on {self.domain.text()}>"

    def __eq__(self, other):
        return (
            isinstance(other, FunctionSpec)
            and self.text() == other.text()
            and self.domain == other.domain
        )

    def __hash__(self):
        return hash((self.text(), self.domain))


class Polynomial(FunctionSpec):
    """Dense polynomial with ascending coefficients, evaluated by Horner."""

    def __init__(self, coefficients, domain: IntervalSpec = _REAL_LINE):
        coeffs = tuple(float(c) for c in coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if not coeffs:
            coeffs = (0.0,)
        self.coefficients = coeffs
        self.domain = domain

    def _value(self, t):
        if isinstance(t, float):
            acc = 0.0
            for c in reversed(self.coefficients):
                acc = acc * t + c
            return acc
        acc = np.zeros_like(np.asarray(t, dtype=float))
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def _jet(self, t, order):
        out = np.empty(order + 1)
        work = list(self.coefficients)
        for j in range(order + 1):
            acc = 0.0
            for c in reversed(work):
                acc = acc * t + c
            out[j] = acc
            # coefficients of f^(j+1)/(j+1)! from those of f^(j)/j!
            work = [work[i] * i / (j + 1) for i in range(1, len(work))] or [0.0]
        return out

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def text(self):
        return "poly:" + ",".join(_fmt(c) for c in self.coefficients)

    def with_domain(self, interval):
        return Polynomial(self.coefficients, interval)


class Moebius(FunctionSpec):
    """Fractional linear map (a t + b) / (c t + d), nondegenerate."""

    def __init__(self, a, b, c, d, domain: IntervalSpec | None = None):
        self.a, self.b, self.c, self.d = (float(a), float(b), float(c), float(d))
        if self.a * self.d - self.b * self.c == 0.0:
            raise ValueError("degenerate moebius map (ad - bc = 0)")
        if domain is None:
            domain = self._default_domain()
        self.domain = domain
        self.validate_on(domain)

    def _default_domain(self):
        if self.c == 0.0:
            return _REAL_LINE
        pole = -self.d / self.c
        if pole <= 0.0:
            return IntervalSpec(pole, math.inf, False, False)
        return IntervalSpec(-math.inf, pole, False, False)

    @property
    def pole(self) -> float | None:
        return None if self.c == 0.0 else -self.d / self.c

    def validate_on(self, interval):
        p = self.pole
        if p is not None and interval.contains(p):
            raise DomainError(
                f"moebius pole t={p!r} lies inside interval {interval.text()}"
            )

    def _value(self, t):
        den = self.c * t + self.d
        if isinstance(t, float):
            if den == 0.0:
                raise DomainError(f"moebius denominator vanishes at t={t!r}")
            return (self.a * t + self.b) / den
        if np.any(den == 0.0):
            bad = float(np.asarray(t)[np.nonzero(den == 0.0)][0])
            raise DomainError(f"moebius denominator vanishes at t={bad!r}")
        return (self.a * t + self.b) / den

    def _jet(self, t, order):
        out = np.empty(order + 1)
        den = self.c * t + self.d
        if den == 0.0:
            raise DomainError(f"moebius denominator vanishes at t={t!r}")
        out[0] = (self.a * t + self.b) / den
        if self.c == 0.0:
            if order >= 1:
                out[1] = self.a / self.d
            out[2:] = 0.0
            return out
        # f = a/c + E/(c t + d): j-th jet term E * (-c)^j / den^(j+1)
        e = (self.b * self.c - self.a * self.d) / self.c
        term = e / den
        for j in range(1, order + 1):
            term *= -self.c / den
            out[j] = term
        return out

    def text(self):
        return f"moebius:{_fmt(self.a)},{_fmt(self.b)},{_fmt(self.c)},{_fmt(self.d)}"

    def with_domain(self, interval):
        return Moebius(self.a, self.b, self.c, self.d, interval)

    def value_range(self) -> IntervalSpec:
        """Image interval of the (monotone) map over its domain."""
        lo, hi = self.domain.lower, self.domain.upper
        va = self._limit_value(lo)
        vb = self._limit_value(hi)
        if va < vb:
            return IntervalSpec(va, vb, self.domain.lower_closed, self.domain.upper_closed)
        return IntervalSpec(vb, va, self.domain.upper_closed, self.domain.lower_closed)

    def _limit_value(self, t: float) -> float:
        if math.isinf(t):
            if self.c != 0.0:
                return self.a / self.c
            return math.inf if (self.a > 0) == (t > 0) else -math.inf
        den = self.c * t + self.d
        if den == 0.0:
            num = self.a * t + self.b
            return math.inf if num > 0 else -math.inf
        return (self.a * t + self.b) / den


class _Builtin(FunctionSpec):
    name = ""

    def __init__(self, domain: IntervalSpec):
        self.domain = domain

    def text(self):
        return self.name

    def with_domain(self, interval):
        out = type(self)(interval)
        out.validate_on(interval)
        return out


class Sqrt(_Builtin):
    name = "sqrt"

    def __init__(self, domain: IntervalSpec = IntervalSpec(0.0, math.inf, True, False)):
        super().__init__(domain)

    def validate_on(self, interval):
        if interval.lower < 0.0:
            raise DomainError(f"sqrt undefined on {interval.text()}")

    def _value(self, t):
        if isinstance(t, float):
            if t < 0.0:
                raise DomainError(f"sqrt of negative value t={t!r}")
            return math.sqrt(t)
        if np.any(np.asarray(t) < 0.0):
            bad = float(np.asarray(t)[np.asarray(t) < 0.0][0])
            raise DomainError(f"sqrt of negative value t={bad!r}")
        return np.sqrt(t)

    def _jet(self, t, order):
        if t <= 0.0:
            raise DomainError(f"sqrt jet needs t > 0, got t={t!r}")
        out = np.empty(order + 1)
        out[0] = math.sqrt(t)
        coef = 1.0
        for j in range(1, order + 1):
            coef *= (0.5 - (j - 1)) / j          # binom(1/2, j), iteratively
            out[j] = coef * t ** (0.5 - j)
        return out


class Log(_Builtin):
    name = "log"

    def __init__(self, domain: IntervalSpec = IntervalSpec(0.0, math.inf, False, False)):
        super().__init__(domain)

    def validate_on(self, interval):
        if interval.lower < 0.0 or (interval.lower == 0.0 and interval.lower_closed):
            raise DomainError(f"log undefined on {interval.text()}")

    def _value(self, t):
        if isinstance(t, float):
            if t <= 0.0:
                raise DomainError(f"log of nonpositive value t={t!r}")
            return math.log(t)
        if np.any(np.asarray(t) <= 0.0):
            bad = float(np.asarray(t)[np.asarray(t) <= 0.0][0])
            raise DomainError(f"log of nonpositive value t={bad!r}")
        return np.log(t)

    def _jet(self, t, order):
        if t <= 0.0:
            raise DomainError(f"log jet needs t > 0, got t={t!r}")
        out = np.empty(order + 1)
        out[0] = math.log(t)
        for j in range(1, order + 1):
            out[j] = (-1.0) ** (j - 1) / (j * t**j)
        return out


class Exp(_Builtin):
    name = "exp"

    def __init__(self, domain: IntervalSpec = _REAL_LINE):
        super().__init__(domain)

    def _value(self, t):
        return math.exp(t) if isinstance(t, float) else np.exp(t)

    def _jet(self, t, order):
        et = math.exp(t)
        return np.array([et / math.factorial(j) for j in range(order + 1)])


class Reciprocal(_Builtin):
    name = "recip"

    def __init__(self, domain: IntervalSpec = IntervalSpec(0.0, math.inf, False, False)):
        super().__init__(domain)

    def validate_on(self, interval):
        if interval.interior_contains(0.0) or interval.contains(0.0):
            raise DomainError(f"recip undefined at 0 inside {interval.text()}")

    def _value(self, t):
        if isinstance(t, float):
            if t == 0.0:
                raise DomainError("recip undefined at t=0")
            return 1.0 / t
        if np.any(np.asarray(t) == 0.0):
            raise DomainError("recip undefined at t=0")
        return 1.0 / np.asarray(t, dtype=float)

    def _jet(self, t, order):
        if t == 0.0:
            raise DomainError("recip jet undefined at t=0")
        return np.array([(-1.0) ** j * t ** (-(j + 1)) for j in range(order + 1)])


def _series_product(p: np.ndarray, q: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1)
    for i, pi in enumerate(p[: order + 1]):
        if pi == 0.0:
            continue
        hi = min(order - i, len(q) - 1)
        out[i : i + hi + 1] += pi * q[: hi + 1]
    return out


class Composition(FunctionSpec):
    """outer(inner(t)); jets by truncated power-series composition."""

    def __init__(self, outer: FunctionSpec, inner: FunctionSpec):
        self.outer = outer
        self.inner = inner
        self.domain = inner.domain

    def _value(self, t):
        return self.outer._value(self.inner._value(t))

    def _jet(self, t, order):
        gin = self.inner._jet(t, order)
        gout = self.outer._jet(float(gin[0]), order)
        v = gin.copy()
        v[0] = 0.0
        out = np.zeros(order + 1)
        out[0] = gout[0]
        power = np.zeros(order + 1)
        power[0] = 1.0
        for j in range(1, order + 1):
            power = _series_product(power, v, order)
            out += gout[j] * power
        return out

    def text(self):
        return f"compose({self.outer.text()};{self.inner.text()})"

    def with_domain(self, interval):
        return Composition(self.outer, self.inner.with_domain(interval))

    def validate_on(self, interval):
        self.inner.validate_on(interval)


class QuotientByT(FunctionSpec):
    """g(t) = f(t)/t on the zero-free side of f's domain."""

    def __init__(self, inner: FunctionSpec, domain: IntervalSpec | None = None):
        if inner.domain.interior_contains(0.0):
            raise DomainError(
                f"quotient by t needs 0 on the boundary or outside, "
                f"domain is {inner.domain.text()}"
            )
        self.inner = inner
        if domain is None:
            domain = _quotient_side_domain(inner.domain)
        self.domain = domain
        self.validate_on(domain)

    def validate_on(self, interval):
        if interval.contains(0.0):
            raise DomainError(f"quotient by t undefined at 0 in {interval.text()}")
        self.inner.validate_on(interval)

    def _value(self, t):
        if isinstance(t, float) and t == 0.0:
            raise DomainError("quotient by t undefined at t=0")
        if not isinstance(t, float) and np.any(np.asarray(t) == 0.0):
            raise DomainError("quotient by t undefined at t=0")
        return self.inner._value(t) / t

    def _jet(self, t, order):
        if t == 0.0:
            raise DomainError("quotient jet undefined at t=0")
        fi = self.inner._jet(t, order)
        out = np.empty(order + 1)
        out[0] = fi[0] / t
        for j in range(1, order + 1):
            out[j] = (fi[j] - out[j - 1]) / t
        return out

    def text(self):
        return f"quot({self.inner.text()})"

    def with_domain(self, interval):
        return QuotientByT(self.inner, interval)


class ShiftedToZero(FunctionSpec):
    """h(t) = f(t) - f(0); requires 0 in f's domain."""

    def __init__(self, inner: FunctionSpec):
        if not inner.domain.contains(0.0):
            raise DomainError(
                f"shift to zero needs 0 in the domain, got {inner.domain.text()}"
            )
        self.inner = inner
        self.value_at_zero = float(inner._value(0.0))
        self.domain = inner.domain

    def _value(self, t):
        return self.inner._value(t) - self.value_at_zero

    def _jet(self, t, order):
        out = self.inner._jet(t, order).copy()
        out[0] -= self.value_at_zero
        return out

    def text(self):
        return f"shift0({self.inner.text()})"

    def with_domain(self, interval):
        return ShiftedToZero(self.inner.with_domain(interval))

    def validate_on(self, interval):
        self.inner.validate_on(interval)


class AntiderivativeSpec(FunctionSpec):
    """G with G' = g exactly and G(basepoint) = 0, via a stored primitive."""

    def __init__(self, inner: FunctionSpec, basepoint: float, primitive, domain=None):
        self.inner = inner
        self.basepoint = float(basepoint)
        self._primitive = primitive
        self._offset = float(primitive(self.basepoint))
        self.domain = inner.domain if domain is None else domain

    def _value(self, t):
        if isinstance(t, float):
            return self._primitive(t) - self._offset
        return np.array([self._primitive(float(v)) for v in np.asarray(t).ravel()]).reshape(
            np.shape(t)
        ) - self._offset

    def _jet(self, t, order):
        out = np.empty(order + 1)
        out[0] = self._primitive(t) - self._offset
        if order >= 1:
            gi = self.inner._jet(t, order - 1)
            for j in range(1, order + 1):
                out[j] = gi[j - 1] / j
        return out

    def text(self):
        return f"integ({self.inner.text()};{_fmt(self.basepoint)})"

    def with_domain(self, interval):
        return AntiderivativeSpec(
            self.inner.with_domain(interval), self.basepoint, self._primitive, interval
        )

    def validate_on(self, interval):
        self.inner.validate_on(interval)


# ---------------------------------------------------------------------------
# factories
# ---------------------------------------------------------------------------

def affine(p: float, q: float, domain: IntervalSpec = _REAL_LINE) -> Polynomial:
    """t -> p*t + q."""
    return Polynomial((q, p), domain)


def transfer(domain: IntervalSpec = IntervalSpec(0.0, 1.0, True, False)) -> Moebius:
    """t -> t/(1-t), the standard map from [0,1) onto [0,inf)."""
    return Moebius(1.0, 0.0, -1.0, 1.0, domain)


def transfer_inverse(
    domain: IntervalSpec = IntervalSpec(0.0, math.inf, True, False),
) -> Moebius:
    """s -> s/(1+s), inverse of the standard transfer map."""
    return Moebius(1.0, 0.0, 1.0, 1.0, domain)


def transfer_map(source: IntervalSpec, target: IntervalSpec) -> FunctionSpec:
    """Monotone increasing map from source onto target.

    Finite-to-finite pairs get an affine map; a finite interval maps onto a
    right-infinite one (or back) through a moebius map of transfer type.
    """
    s_fin, t_fin = source.is_finite, target.is_finite
    if s_fin and t_fin:
        scale = target.width / source.width
        return Polynomial((target.lower - source.lower * scale, scale), source)
    if s_fin and math.isfinite(target.lower) and math.isinf(target.upper):
        a, b = source.lower, source.upper
        c = target.lower
        # (t - a)/(b - t) + c, combined into a single moebius map
        return Moebius(1.0 - c, c * b - a, -1.0, b, source)
    if t_fin and math.isfinite(source.lower) and math.isinf(source.upper):
        return invert(transfer_map(target, source)).with_domain(source)
    raise UnsupportedOperationError(
        f"unsupported interval pair {source.text()} -> {target.text()}"
    )


def invert(f: FunctionSpec) -> FunctionSpec:
    """Inverse of an invertible affine or moebius spec, domain = image."""
    if isinstance(f, Polynomial) and f.degree == 1:
        q, p = f.coefficients
        if p == 0.0:
            raise UnsupportedOperationError("constant map has no inverse")
        lo, hi = f.domain.lower, f.domain.upper
        img = sorted((q + p * lo, q + p * hi))
        dom = IntervalSpec(
            img[0],
            img[1],
            f.domain.lower_closed if p > 0 else f.domain.upper_closed,
            f.domain.upper_closed if p > 0 else f.domain.lower_closed,
        )
        return Polynomial((-q / p, 1.0 / p), dom)
    if isinstance(f, Moebius):
        return Moebius(f.d, -f.b, -f.c, f.a, f.value_range())
    raise UnsupportedOperationError(f"no closed-form inverse for {f.text()}")


def _quotient_side_domain(dom: IntervalSpec) -> IntervalSpec:
    """Open zero-free side of a domain: toward +inf when it reaches past 0."""
    if dom.upper > 0.0:
        return IntervalSpec(max(dom.lower, 0.0), dom.upper, False, False)
    return IntervalSpec(dom.lower, min(dom.upper, 0.0), False, False)


def quotient_by_t(f: FunctionSpec) -> FunctionSpec:
    """g(t) = f(t)/t; polynomial input with zero constant term reduces exactly."""
    if isinstance(f, Polynomial):
        dom = _quotient_side_domain(f.domain)
        if f.coefficients[0] == 0.0:
            reduced = f.coefficients[1:] or (0.0,)
            return Polynomial(reduced, dom)
        if f.degree <= 1:
            # (q + p t)/t is itself a moebius map
            q, p = (f.coefficients + (0.0,))[:2]
            return Moebius(p, q, 1.0, 0.0, dom)
    return QuotientByT(f)


def shifted_to_zero(f: FunctionSpec) -> FunctionSpec:
    """h(t) = f(t) - f(0); polynomials reduce exactly."""
    if isinstance(f, Polynomial):
        return Polynomial((0.0,) + f.coefficients[1:], f.domain)
    return ShiftedToZero(f)


def antiderivative(g: FunctionSpec, basepoint: float) -> FunctionSpec:
    """G with G(basepoint) = 0 and G' = g exactly.

    Supported kinds: polynomials (integrate coefficients), moebius maps and
    polynomial-over-t quotients (both pick up a logarithm term).
    """
    basepoint = float(basepoint)
    if isinstance(g, Polynomial):
        coeffs = [0.0] + [c / (i + 1) for i, c in enumerate(g.coefficients)]
        prim = Polynomial(coeffs, g.domain)
        shift = float(prim._value(basepoint))
        coeffs[0] = -shift
        return Polynomial(coeffs, g.domain)
    if isinstance(g, Moebius):
        if g.c == 0.0:
            return antiderivative(
                Polynomial((g.b / g.d, g.a / g.d), g.domain), basepoint
            )
        a, b, c, d = g.a, g.b, g.c, g.d
        slope = a / c
        logc = (b * c - a * d) / (c * c)

        def primitive(t, slope=slope, logc=logc, c=c, d=d):
            den = c * t + d
            if den == 0.0:
                raise DomainError(f"antiderivative undefined at pole t={t!r}")
            return slope * t + logc * math.log(abs(den))

        return AntiderivativeSpec(g, basepoint, primitive)
    if isinstance(g, QuotientByT) and isinstance(g.inner, Polynomial):
        c0 = g.inner.coefficients[0]
        poly_part = Polynomial(g.inner.coefficients[1:] or (0.0,), g.domain)
        ppoly = antiderivative(poly_part, basepoint)

        def primitive(t, ppoly=ppoly, c0=c0):
            if t == 0.0:
                raise DomainError("antiderivative undefined at t=0")
            return float(ppoly._value(float(t))) + c0 * math.log(abs(t))

        return AntiderivativeSpec(g, basepoint, primitive)
    raise UnsupportedOperationError(
        f"no closed-form antiderivative for kind {type(g).__name__}"
    )


def gap_polynomial(n: int, domain: IntervalSpec = _REAL_LINE) -> Polynomial:
    """Odd polynomial with coefficient 1/(2k-1) at degree 2k-1, k = 1..n."""
    if n < 1:
        raise ValueError("order must be >= 1")
    coeffs = [0.0] * (2 * n)
    for k in range(1, n + 1):
        coeffs[2 * k - 1] = 1.0 / (2 * k - 1)
    return Polynomial(coeffs, domain)


def negate(f: FunctionSpec) -> FunctionSpec:
    """-f, as an explicit spec."""
    if isinstance(f, Polynomial):
        return Polynomial([-c for c in f.coefficients], f.domain)
    return Composition(Polynomial((0.0, -1.0)), f)


# ---------------------------------------------------------------------------
# mini-language parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"[+-]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)")


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos].isspace():
            self.pos += 1

    def _fail(self, expected):
        raise ParseError("parse error", self.pos, expected)

    def _literal(self, lit: str):
        self._skip_ws()
        if not self.source.startswith(lit, self.pos):
            self._fail(repr(lit))
        self.pos += len(lit)

    def _try_literal(self, lit: str) -> bool:
        self._skip_ws()
        if self.source.startswith(lit, self.pos):
            self.pos += len(lit)
            return True
        return False

    def _number(self) -> float:
        self._skip_ws()
        m = _NUMBER_RE.match(self.source, self.pos)
        if not m:
            self._fail("a number")
        self.pos = m.end()
        return float(m.group())

    def _number_list(self) -> list[float]:
        out = [self._number()]
        while self._try_literal(","):
            out.append(self._number())
        return out

    def parse(self) -> FunctionSpec:
        spec = self._function()
        self._skip_ws()
        if self.pos != len(self.source):
            self._fail("end of input")
        return spec

    def _function(self) -> FunctionSpec:
        self._skip_ws()
        for name, builder in (
            ("poly", self._poly),
            ("moebius", self._moebius),
            ("gap", self._gap),
            ("compose", self._compose),
            ("quot", self._quot),
            ("shift0", self._shift0),
            ("integ", self._integ),
            ("sqrt", lambda: Sqrt()),
            ("log", lambda: Log()),
            ("exp", lambda: Exp()),
            ("recip", lambda: Reciprocal()),
        ):
            if self._try_literal(name):
                return builder()
        self._fail("a function kind (poly, moebius, gap, sqrt, log, exp, recip, compose, quot, shift0, integ)")

    def _poly(self):
        self._literal(":")
        return Polynomial(self._number_list())

    def _moebius(self):
        self._literal(":")
        nums = self._number_list()
        if len(nums) != 4:
            self._fail("exactly four moebius coefficients")
        return Moebius(*nums)

    def _gap(self):
        self._literal(":")
        n = self._number()
        if n != int(n) or n < 1:
            self._fail("a positive integer order")
        return gap_polynomial(int(n))

    def _compose(self):
        self._literal("(")
        outer = self._function()
        self._literal(";")
        inner = self._function()
        self._literal(")")
        return Composition(outer, inner)

    def _quot(self):
        self._literal("(")
        inner = self._function()
        self._literal(")")
        return quotient_by_t(inner)

    def _shift0(self):
        self._literal("(")
        inner = self._function()
        self._literal(")")
        return shifted_to_zero(inner)

    def _integ(self):
        self._literal("(")
        inner = self._function()
        self._literal(";")
        basepoint = self._number()
        self._literal(")")
        return antiderivative(inner, basepoint)


def parse_function(text: str, domain: IntervalSpec | None = None) -> FunctionSpec:
    """Parse mini-language text; optionally rebind the evaluation domain."""
    spec = _Parser(text).parse()
    if domain is not None:
        spec = spec.with_domain(domain)
    return spec
