"""One-dimensional Gauss-Markov kernels and their tensor (TM) products.

Every kernel is stored through its factor pair ``(p, q)``::

    k(x, x') = p(min(x, x')) * q(max(x, x'))

with ``p, q > 0`` and ``p/q`` strictly increasing.  The fast inversion code
never asks for kernel values directly; it asks for the *cross term*

    cross(a, b) = p(b) q(a) - p(a) q(b),        a < b,

which is positive for every valid pair.  The grid endpoints ``-inf`` and
``+inf`` stand for "no neighbour on that side" and carry the conventional
values ``(p, q) = (0, 1)`` and ``(1, 0)`` respectively, so that
``cross(-inf, b) = p(b)``, ``cross(a, +inf) = q(a)`` and
``cross(-inf, +inf) = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InputError, KernelValidityError

__all__ = [
    "GaussMarkov1D",
    "BrownianMotion",
    "BrownianBridge",
    "Laplace",
    "AffineBrownian",
    "PQKernel",
    "TMKernel",
    "DomainMap",
    "MarkovReport",
    "eval1d",
    "validate_markov",
    "parse_kernel_spec",
    "clamp_unit",
    "BOUNDARY_NUDGE",
]

BOUNDARY_NUDGE = 2.0**-52


class GaussMarkov1D:
    """Base class for a one-dimensional Gauss-Markov kernel on (0, 1)."""

    name = "gm"

    def p(self, x):
        raise NotImplementedError

    def q(self, x):
        raise NotImplementedError

    def _cross(self, a, b):
        # Generic form; subclasses override with cancellation-free versions.
        return self.p(b) * self.q(a) - self.p(a) * self.q(b)

    def _k(self, lo, hi):
        return self.p(lo) * self.q(hi)

    def cross(self, a, b):
        """``p(b) q(a) - p(a) q(b)`` with the +/-inf endpoint conventions."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        a_inf = np.isneginf(a)
        b_inf = np.isposinf(b)
        if not (a_inf.any() or b_inf.any()):
            return self._cross(a, b)
        a_ = np.where(a_inf, 0.5, a)
        b_ = np.where(b_inf, 0.5, b)
        out = np.asarray(self._cross(a_, b_), dtype=float)
        out = np.where(a_inf & ~b_inf, self.p(b_), out)
        out = np.where(~a_inf & b_inf, self.q(a_), out)
        out = np.where(a_inf & b_inf, 1.0, out)
        return out

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self._k(np.minimum(x, y), np.maximum(x, y))

    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class BrownianMotion(GaussMarkov1D):
    """Standard Brownian motion, ``k(x, x') = min(x, x')``."""

    name = "bm"

    def p(self, x):
        return np.asarray(x, dtype=float) * 1.0

    def q(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def _cross(self, a, b):
        return b - a

    def _k(self, lo, hi):
        return lo * np.ones_like(hi)

    def spec(self):
        return "bm"


@dataclass(frozen=True)
class BrownianBridge(GaussMarkov1D):
    """Brownian bridge pinned at 0 and ``T`` (``T >= 1`` on the unit interval)."""

    T: float = 1.0
    name = "bb"

    def __post_init__(self):
        if not (self.T >= 1.0 and math.isfinite(self.T)):
            raise KernelValidityError(
                f"Brownian bridge horizon T={self.T} must be >= 1 so that q > 0 on (0, 1)"
            )

    def p(self, x):
        return np.asarray(x, dtype=float) * 1.0

    def q(self, x):
        return 1.0 - np.asarray(x, dtype=float) / self.T

    def _cross(self, a, b):
        # b(1 - a/T) - a(1 - b/T) = b - a
        return b - a

    def spec(self):
        return f"bb:{self.T!r}"


@dataclass(frozen=True)
class Laplace(GaussMarkov1D):
    """Ornstein-Uhlenbeck kernel ``exp(-theta |x - x'|)``."""

    theta: float = 1.0
    name = "laplace"

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise KernelValidityError(f"Laplace theta={self.theta} must be positive")

    def p(self, x):
        return np.exp(self.theta * np.asarray(x, dtype=float))

    def q(self, x):
        return np.exp(-self.theta * np.asarray(x, dtype=float))

    def _cross(self, a, b):
        return 2.0 * np.sinh(self.theta * (b - a))

    def _k(self, lo, hi):
        return np.exp(-self.theta * (hi - lo))

    def spec(self):
        return f"laplace:{self.theta!r}"


@dataclass(frozen=True)
class AffineBrownian(GaussMarkov1D):
    """Brownian field factor ``theta0 + theta1 * min(x, x')`` (GIBF of order 0)."""

    theta0: float = 0.0
    theta1: float = 1.0
    name = "affinebm"

    def __post_init__(self):
        if not (self.theta0 >= 0 and self.theta1 > 0):
            raise KernelValidityError(
                f"affine Brownian needs theta0 >= 0 and theta1 > 0, got "
                f"({self.theta0}, {self.theta1})"
            )

    def p(self, x):
        return self.theta0 + self.theta1 * np.asarray(x, dtype=float)

    def q(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def _cross(self, a, b):
        return self.theta1 * (b - a)

    def _k(self, lo, hi):
        return (self.theta0 + self.theta1 * lo) * np.ones_like(hi)

    def spec(self):
        return f"affinebm:{self.theta0!r},{self.theta1!r}"


@dataclass(frozen=True)
class PQKernel(GaussMarkov1D):
    """Kernel given by arbitrary vectorised callables ``p`` and ``q``.

    No check is made at construction; run :func:`validate_markov` first.
    """

    p_func: Callable = field(repr=False)
    q_func: Callable = field(repr=False)
    label: str = "custom"

    def p(self, x):
        return np.asarray(self.p_func(np.asarray(x, dtype=float)), dtype=float)

    def q(self, x):
        return np.asarray(self.q_func(np.asarray(x, dtype=float)), dtype=float)

    def spec(self):
        return self.label


def _check_unit(x, what="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InputError(f"{what} outside the component domain [0, 1]: {x!r}")
    return arr


def eval1d(kern: GaussMarkov1D, x, y):
    """Evaluate ``p(min(x, y)) q(max(x, y))`` on the unit interval."""
    xa = _check_unit(x, "x")
    ya = _check_unit(y, "y")
    out = kern(xa, ya)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class TMKernel:
    """Tensor Markov kernel: a product of one Gauss-Markov factor per dimension."""

    components: tuple

    def __init__(self, components: Sequence[GaussMarkov1D]):
        comps = tuple(components)
        if not comps:
            raise InputError("a TM kernel needs at least one component")
        for c in comps:
            if not isinstance(c, GaussMarkov1D):
                raise InputError(f"not a Gauss-Markov component: {c!r}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def broadcast(cls, component: GaussMarkov1D, d: int) -> "TMKernel":
        return cls([component] * d)

    @property
    def dim(self) -> int:
        return len(self.components)

    def _points(self, x, name):
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1:] != (self.dim,):
            raise InputError(
                f"{name} has trailing dimension {arr.shape[-1:] or 'scalar'}, kernel has d={self.dim}"
            )
        return arr

    def eval(self, x, y) -> float:
        """Kernel value at a single pair of points of the unit cube."""
        xa = self._points(x, "x")
        ya = self._points(y, "y")
        if xa.ndim != 1 or ya.ndim != 1:
            raise InputError("eval expects single points; use gram for batches")
        out = 1.0
        for j, c in enumerate(self.components):
            out *= float(c(xa[j], ya[j]))
        return out

    def gram(self, X, Y=None) -> np.ndarray:
        """Dense cross-covariance matrix ``k(X_a, Y_b)``."""
        X = np.atleast_2d(self._points(X, "X"))
        Y = X if Y is None else np.atleast_2d(self._points(Y, "Y"))
        out = np.ones((X.shape[0], Y.shape[0]))
        for j, c in enumerate(self.components):
            out *= c(X[:, j, None], Y[None, :, j])
        return out

    def diag(self, X) -> np.ndarray:
        """``k(x, x)`` for each row of ``X``."""
        X = np.atleast_2d(self._points(X, "X"))
        out = np.ones(X.shape[0])
        for j, c in enumerate(self.components):
            out *= c.p(X[:, j]) * c.q(X[:, j])
        return out

    def spec(self) -> str:
        specs = [c.spec() for c in self.components]
        if len(set(specs)) == 1:
            return specs[0]
        return ";".join(specs)


@dataclass(frozen=True)
class DomainMap:
    """Per-dimension affine map from a user box ``(lo, hi)`` onto ``(0, 1)^d``."""

    lo: tuple
    hi: tuple

    def __init__(self, lo, hi):
        lo_t = tuple(float(v) for v in np.atleast_1d(lo))
        hi_t = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo_t) != len(hi_t):
            raise InputError("lo and hi must have the same length")
        for a, b in zip(lo_t, hi_t):
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise InputError(f"invalid domain interval ({a}, {b})")
        object.__setattr__(self, "lo", lo_t)
        object.__setattr__(self, "hi", hi_t)

    @classmethod
    def unit(cls, d: int) -> "DomainMap":
        return cls([0.0] * d, [1.0] * d)

    @classmethod
    def box(cls, lo: float, hi: float, d: int) -> "DomainMap":
        return cls([lo] * d, [hi] * d)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def is_unit(self) -> bool:
        return all(a == 0.0 for a in self.lo) and all(b == 1.0 for b in self.hi)

    def to_unit(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise InputError(f"point dimension {x.shape[-1:]} does not match domain d={self.dim}")
        if self.is_unit:
            return x.copy()
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return (x - lo) / (hi - lo)

    def from_unit(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1:] != (self.dim,):
            raise InputError(f"point dimension {u.shape[-1:]} does not match domain d={self.dim}")
        if self.is_unit:
            return u.copy()
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return lo + u * (hi - lo)


def clamp_unit(u, warn: bool = True):
    """Clamp prediction coordinates into the open cube ``[2^-52, 1 - 2^-52]``.

    Returns the clamped array and the boolean row mask of points that moved.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise InputError("prediction coordinates must be finite")
    clamped = np.clip(u, BOUNDARY_NUDGE, 1.0 - BOUNDARY_NUDGE)
    moved = np.any(clamped != u, axis=-1)
    if warn and np.any(moved):
        warnings.warn(
            f"{int(np.count_nonzero(moved))} prediction point(s) on or outside the "
            "boundary of (0,1)^d were clamped inward",
            RuntimeWarning,
            stacklevel=3,
        )
    return clamped, moved


@dataclass
class MarkovReport:
    passed: bool
    positive: bool
    monotone: bool
    first_violation: Optional[tuple] = None
    message: str = ""


def validate_markov(kern: GaussMarkov1D, probe_count: int = 100) -> MarkovReport:
    """Probe positivity of p, q and strict increase of p/q on an interior mesh."""
    if probe_count < 2:
        raise InputError("probe_count must be at least 2")
    xs = np.arange(1, probe_count + 1) / (probe_count + 1)
    p = np.asarray(kern.p(xs), dtype=float)
    q = np.asarray(kern.q(xs), dtype=float)
    bad = np.flatnonzero(~(np.isfinite(p) & np.isfinite(q) & (p > 0) & (q > 0)))
    if bad.size:
        x0 = float(xs[bad[0]])
        return MarkovReport(False, False, False, (x0, x0),
                            f"p or q not positive at x={x0:.6g}")
    ratio = p / q
    # compare ratios through the cross term to avoid dividing twice
    cr = np.asarray(kern.cross(xs[:-1], xs[1:]), dtype=float)
    bad = np.flatnonzero(~(cr > 0) | ~(np.diff(ratio) > 0))
    if bad.size:
        k = int(bad[0])
        pair = (float(xs[k]), float(xs[k + 1]))
        return MarkovReport(False, True, False, pair,
                            f"p/q not strictly increasing between x={pair[0]:.6g} and {pair[1]:.6g}")
    return MarkovReport(True, True, True, None, "ok")


def _parse_one(token: str) -> GaussMarkov1D:
    token = token.strip()
    name, _, args = token.partition(":")
    name = name.strip().lower()
    try:
        vals = [float(a) for a in args.split(",")] if args.strip() else []
    except ValueError as exc:
        raise InputError(f"bad kernel parameters in {token!r}") from exc
    if name == "bm" and not vals:
        return BrownianMotion()
    if name == "bb" and len(vals) <= 1:
        return BrownianBridge(*vals)
    if name == "laplace" and len(vals) <= 1:
        return Laplace(*vals)
    if name == "affinebm" and len(vals) == 2:
        return AffineBrownian(*vals)
    raise InputError(
        f"unknown kernel spec {token!r}; expected laplace:theta, bm, bb:T or affinebm:theta0,theta1"
    )


def parse_kernel_spec(spec: str, d: int) -> TMKernel:
    """Parse ``laplace:1``-style strings; ``;`` separates per-dimension specs."""
    tokens = [t for t in spec.split(";") if t.strip()]
    if not tokens:
        raise InputError("empty kernel spec")
    comps = [_parse_one(t) for t in tokens]
    if len(comps) == 1:
        return TMKernel.broadcast(comps[0], d)
    if len(comps) != d:
        raise InputError(f"kernel spec lists {len(comps)} components for d={d}")
    return TMKernel(comps)
