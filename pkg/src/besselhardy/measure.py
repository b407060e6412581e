"""Exact arithmetic for the weighted measure x^alpha dx on the half-line.

Interval masses, balls, enlargements, the length^2/mass functional and its
nested-interval monotonicity comparand, and closed-form potential integrals.
Everything here is closed-form; no quadrature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, NonLocallyIntegrable


class LengthConvention(enum.Enum):
    """How to read |cI| when an enlarged ball pokes past the origin.

    BALL uses the nominal ball diameter 2cr; TRUNCATED uses the diameter of
    the intersection with (0, inf).  They differ only for intervals whose
    enlargement is cut off at 0.
    """

    BALL = "ball"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class Interval:
    """Closed subinterval of [0, inf), optionally remembering its ball form.

    ``a``/``b`` describe the support (already truncated at 0); ``ball_center``
    and ``ball_radius`` are kept when the interval arose as a ball so that
    further enlargements dilate the original ball, not the truncated set.
    """

    a: float
    b: float
    ball_center: float | None = None
    ball_radius: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.a < self.b < math.inf):
            raise ValueError(f"need 0 <= a < b < inf, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return self.ball_center if self.ball_center is not None else 0.5 * (self.a + self.b)

    @property
    def radius(self) -> float:
        return self.ball_radius if self.ball_radius is not None else 0.5 * (self.b - self.a)

    @property
    def nominal_length(self) -> float:
        return 2.0 * self.radius

    def length_by(self, convention: LengthConvention) -> float:
        return self.nominal_length if convention is LengthConvention.BALL else self.length

    def contains(self, x: float) -> bool:
        return self.a <= x <= self.b

    def contains_interval(self, other: "Interval") -> bool:
        return self.a <= other.a and other.b <= self.b

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = max(self.a, other.a)
        hi = min(self.b, other.b)
        if lo >= hi:
            return None
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.a, other.a), max(self.b, other.b))


def ball(x: float, r: float) -> Interval:
    """B(x, r) intersected with (0, inf); keeps the untruncated radius."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return Interval(max(0.0, x - r), x + r, ball_center=x, ball_radius=r)


def enlarge(interval: Interval, c: float) -> Interval:
    """Dilate the ball form of ``interval`` by ``c >= 1`` and truncate at 0."""
    if c < 1.0:
        raise ValueError("enlargement factor must be >= 1")
    if c == 1.0 and interval.ball_center is None:
        return interval
    return ball(interval.center, c * interval.radius)


class LengthMassRatio(NamedTuple):
    value: float
    comparand: float  # b^{1-alpha} - a^{1-alpha}


@dataclass(frozen=True)
class WeightedMeasure:
    """The measure x^alpha dx on X = (0, inf)."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive real, got {self.alpha}")

    @property
    def kernel_order(self) -> float:
        """Bessel order of the associated heat kernel, (alpha - 1)/2."""
        return 0.5 * (self.alpha - 1.0)

    def mu_ab(self, a: float, b: float) -> float:
        """mu((a, b)) = (b^{1+alpha} - a^{1+alpha}) / (1+alpha); 0 if a == b."""
        if a < 0.0 or b < a:
            raise ValueError(f"need 0 <= a <= b, got ({a}, {b})")
        if a == b:
            return 0.0
        p = 1.0 + self.alpha
        return (b**p - a**p) / p

    def mu(self, interval: Interval) -> float:
        return self.mu_ab(interval.a, interval.b)

    def ball_mass(self, x: float, r: float) -> float:
        return self.mu_ab(max(0.0, x - r), x + r)

    def length_sq_over_mass(self, interval: Interval) -> LengthMassRatio:
        """|I|^2 / mu(I) together with the comparand b^{1-a} - a^{1-a}."""
        mass = self.mu(interval)
        value = interval.length**2 / mass
        comparand = interval.b ** (1.0 - self.alpha) - interval.a ** (1.0 - self.alpha)
        return LengthMassRatio(value, comparand)

    def gamma_ratio(self, x: float, y: float) -> float:
        """(y-x)^2 / (y^{1+alpha} - x^{1+alpha}) for 0 <= x < y."""
        if not (0.0 <= x < y):
            raise ValueError(f"need 0 <= x < y, got ({x}, {y})")
        p = 1.0 + self.alpha
        return (y - x) ** 2 / (y**p - x**p)

    def doubling_ratio(self, x: float, r: float) -> float:
        return self.ball_mass(x, 2.0 * r) / self.ball_mass(x, r)

    def potential_integral(self, potential: "Potential", interval: Interval) -> float:
        potential.validate_for(self.alpha)
        total = 0.0
        for lo, hi, coeff, expo in potential.terms():
            seg_lo = max(interval.a, lo)
            seg_hi = min(interval.b, hi)
            if seg_lo >= seg_hi or coeff == 0.0:
                continue
            p = self.alpha + expo + 1.0
            total += coeff * (seg_hi**p - seg_lo**p) / p
        return total


@dataclass(frozen=True)
class Potential:
    """Nonnegative potential: constant pieces plus an optional power tail.

    ``pieces`` holds (a, b, value) triples; the optional tail is
    ``power_coeff * x^{-power_exponent}`` on all of X.  Local mu-integrability
    requires power_exponent < 1 + alpha, which is checked against the measure
    that actually integrates it.
    """

    pieces: tuple[tuple[float, float, float], ...] = ()
    power_coeff: float = 0.0
    power_exponent: float = 0.0

    def __post_init__(self):
        for a, b, v in self.pieces:
            if not (0.0 <= a < b):
                raise ValueError(f"bad piece endpoints ({a}, {b})")
            if v < 0.0:
                raise ValueError("piece values must be nonnegative")
        if self.power_coeff < 0.0:
            raise ValueError("power coefficient must be nonnegative")

    @classmethod
    def constant(cls, value: float, support: tuple[float, float] = (0.0, 1024.0)) -> "Potential":
        return cls(pieces=((support[0], support[1], value),))

    @classmethod
    def power(cls, coeff: float, exponent: float) -> "Potential":
        return cls(power_coeff=coeff, power_exponent=exponent)

    @classmethod
    def zero(cls) -> "Potential":
        return cls()

    def validate_for(self, alpha: float) -> None:
        if self.power_coeff > 0.0 and not (self.power_exponent < 1.0 + alpha):
            raise NonLocallyIntegrable(
                f"power exponent {self.power_exponent} >= 1 + alpha = {1.0 + alpha}"
            )

    def terms(self):
        """Yield (lo, hi, coeff, exponent) with V = sum coeff * x^exponent."""
        for a, b, v in self.pieces:
            if v != 0.0:
                yield (a, b, v, 0.0)
        if self.power_coeff > 0.0:
            yield (0.0, math.inf, self.power_coeff, -self.power_exponent)

    @property
    def is_zero(self) -> bool:
        return self.power_coeff == 0.0 and all(v == 0.0 for _, _, v in self.pieces)

    def __call__(self, x):
        arr = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(arr)
        for a, b, v in self.pieces:
            out += np.where((arr >= a) & (arr <= b), v, 0.0)
        if self.power_coeff > 0.0:
            out += self.power_coeff * arr ** (-self.power_exponent)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out

    def max_on(self, interval: Interval) -> float:
        vals = [v for a, b, v in self.pieces if max(a, interval.a) < min(b, interval.b)]
        top = sum(vals)
        if self.power_coeff > 0.0:
            top += self.power_coeff * interval.a ** (-self.power_exponent) if interval.a > 0 else math.inf
        return top


def parse_potential(text: str, source: str = "<inline>") -> Potential:
    """Parse the plain-text potential format.

    One directive per line (``;`` also separates directives inline):
    ``piece <a> <b> <value>`` or ``power <coeff> <exponent>``.
    Blank lines and ``#`` comments are ignored.
    """
    pieces: list[tuple[float, float, float]] = []
    coeff = 0.0
    expo = 0.0
    lines = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        for part in raw.split(";"):
            lines.append((ln, part))
    for ln, raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "piece" and len(fields) == 4:
                a, b, v = (float(f) for f in fields[1:])
                pieces.append((a, b, v))
            elif fields[0] == "power" and len(fields) == 3:
                if coeff != 0.0:
                    raise ValueError("duplicate power directive")
                coeff, expo = float(fields[1]), float(fields[2])
            else:
                raise ValueError(f"unknown directive {fields[0]!r}")
        except ValueError as exc:
            raise ConfigError(f"{source}:{ln}: {exc}") from exc
    try:
        return Potential(pieces=tuple(pieces), power_coeff=coeff, power_exponent=expo)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_potential(path: str) -> Potential:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_potential(fh.read(), source=path)
