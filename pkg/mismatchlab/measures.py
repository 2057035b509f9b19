# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Exact algebra and distances for probability measures on the real line that
are finite mixtures of point masses and piecewise-constant densities.

Total variation uses the factor-2 convention throughout:
``tv_distance(mu, nu) = 2 * sup_B |mu(B) - nu(B)|``, so disjoint point masses
are at distance 2.
"""

import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .exceptions import MeasureValidationException, UnboundedSupportException

TOLERANCE = 1e-12
MAX_DEGREE = 3

Atom = Tuple[float, float]
Piece = Tuple[float, float, float]


class Interval:
    """A real interval with configurable closedness of its ends.

    :param a: Left end.
    :param b: Right end, b >= a.
    :param left_closed: True if a belongs to the interval.
    :param right_closed: True if b belongs to the interval.
    """

    def __init__(
        self,
        a: float,
        b: float,
        left_closed: bool = True,
        right_closed: bool = False,
    ):
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("interval ends must be finite")
        if b < a:
            raise ValueError(f"interval [{a}, {b}] has b < a")
        self._a = float(a)
        self._b = float(b)
        self._left_closed = left_closed
        self._right_closed = right_closed

    @staticmethod
    def closed(a: float, b: float) -> "Interval":
        return Interval(a, b, True, True)

    @staticmethod
    def half_open(a: float, b: float) -> "Interval":
        return Interval(a, b, True, False)

    @staticmethod
    def open(a: float, b: float) -> "Interval":
        return Interval(a, b, False, False)

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x, True, True)

    @property
    def a(self) -> float:
        return self._a

    @property
    def b(self) -> float:
        return self._b

    @property
    def left_closed(self) -> bool:
        return self._left_closed

    @property
    def right_closed(self) -> bool:
        return self._right_closed

    def contains(self, x: float) -> bool:
        """True if x lies in the interval, ends compared within TOLERANCE."""
        if self._left_closed:
            left_ok = x >= self._a - TOLERANCE
        else:
            left_ok = x > self._a + TOLERANCE
        if self._right_closed:
            right_ok = x <= self._b + TOLERANCE
        else:
            right_ok = x < self._b - TOLERANCE
        return left_ok and right_ok

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        if self._left_closed:
            left_ok = x >= self._a - TOLERANCE
        else:
            left_ok = x > self._a + TOLERANCE
        if self._right_closed:
            right_ok = x <= self._b + TOLERANCE
        else:
            right_ok = x < self._b - TOLERANCE
        return left_ok & right_ok

    @property
    def is_point(self) -> bool:
        return self._a == self._b

    def midpoint(self) -> float:
        return 0.5 * (self._a + self._b)

    def to_json(self) -> dict:
        return {
            "a": self._a,
            "b": self._b,
            "left_closed": self._left_closed,
            "right_closed": self._right_closed,
        }

    @staticmethod
    def from_json(json) -> "Interval":
        return Interval(
            json["a"],
            json["b"],
            bool(json.get("left_closed", True)),
            bool(json.get("right_closed", False)),
        )

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return self.to_json() == other.to_json()

    def __hash__(self):
        return hash(
            (self._a, self._b, self._left_closed, self._right_closed)
        )

    def __str__(self):
        left = "[" if self._left_closed else "("
        right = "]" if self._right_closed else ")"
        return f"{left}{self._a:.17g}, {self._b:.17g}{right}"

    def __repr__(self):
        return f"Interval{self}"


def _snap(values: np.ndarray) -> np.ndarray:
    """Returns the sorted representatives of values, where values closer than
    TOLERANCE to their predecessor share the predecessor's representative."""
    ordered = np.sort(np.asarray(values, dtype=float))
    if ordered.size == 0:
        return ordered
    keep = np.concatenate(([True], np.diff(ordered) > TOLERANCE))
    return ordered[keep]


def _grid_index(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Index of the representative in grid for each value."""
    return np.searchsorted(grid, values + TOLERANCE, side="right") - 1


def _check_finite(name: str, values: np.ndarray):
    if values.size and not np.all(np.isfinite(values)):
        raise MeasureValidationException(f"{name} must be finite")


class Measure1D:
    """A finite measure on the real line: weighted atoms plus piecewise
    constant density pieces on half-open intervals [a, b).

    The measure is always held in canonical form: atoms sorted with distinct
    locations, pieces sorted, non-overlapping, with positive heights, split at
    atom locations and merged where adjacent heights agree within TOLERANCE.

    :param atoms: Iterable of (location, mass) pairs, mass >= 0.
    :param pieces: Iterable of (a, b, height) triples, a < b, height >= 0.
    """

    def __init__(
        self,
        atoms: Iterable[Sequence[float]] = (),
        pieces: Iterable[Sequence[float]] = (),
    ):
        atom_array = np.asarray(list(atoms), dtype=float).reshape(-1, 2)
        piece_array = np.asarray(list(pieces), dtype=float).reshape(-1, 3)
        self._set_atoms(atom_array[:, 0], atom_array[:, 1])
        self._set_pieces(
            piece_array[:, 0], piece_array[:, 1], piece_array[:, 2]
        )

    @classmethod
    def _from_arrays(cls, loc, mass, pa, pb, ph) -> "Measure1D":
        measure = cls.__new__(cls)
        measure._set_atoms(np.asarray(loc, float), np.asarray(mass, float))
        measure._set_pieces(
            np.asarray(pa, float), np.asarray(pb, float), np.asarray(ph, float)
        )
        return measure

    def _set_atoms(self, loc: np.ndarray, mass: np.ndarray):
        _check_finite("atom locations", loc)
        _check_finite("atom masses", mass)
        if mass.size and mass.min() < -TOLERANCE:
            raise MeasureValidationException(
                f"atom mass {mass.min():.17g} is negative",
                mass=float(mass.min()),
            )
        grid = _snap(loc)
        if grid.size:
            merged = np.bincount(
                _grid_index(grid, loc), weights=mass, minlength=grid.size
            )
        else:
            merged = np.zeros(0)
        positive = merged > 0.0
        self._atom_loc = grid[positive]
        self._atom_mass = merged[positive]

    def _set_pieces(self, pa: np.ndarray, pb: np.ndarray, ph: np.ndarray):
        for name, values in (("piece ends", pa), ("piece ends", pb)):
            _check_finite(name, values)
        _check_finite("piece heights", ph)
        if ph.size and ph.min() < -TOLERANCE:
            raise MeasureValidationException(
                f"piece height {ph.min():.17g} is negative"
            )
        if np.any(pb < pa):
            raise MeasureValidationException("piece with b < a")
        grid = _snap(np.concatenate((pa, pb, self._atom_loc)))
        if grid.size < 2 or pa.size == 0:
            self._piece_a = np.zeros(0)
            self._piece_b = np.zeros(0)
            self._piece_h = np.zeros(0)
            return
        ia = _grid_index(grid, pa)
        ib = _grid_index(grid, pb)
        delta = np.zeros(grid.size)
        np.add.at(delta, ia, ph)
        np.add.at(delta, ib, -ph)
        heights = np.cumsum(delta)[:-1]
        if heights.size and heights.min() < -TOLERANCE:
            raise MeasureValidationException(
                f"piece height {heights.min():.17g} is negative"
            )
        heights[np.abs(heights) <= TOLERANCE] = 0.0
        lefts = grid[:-1]
        rights = grid[1:]
        atom_breaks = set(self._atom_loc.tolist())
        out_a: List[float] = []
        out_b: List[float] = []
        out_h: List[float] = []
        for left, right, height in zip(lefts, rights, heights):
            if height <= 0.0:
                continue
            if (
                out_b
                and out_b[-1] == left
                and abs(out_h[-1] - height) <= TOLERANCE
                and left not in atom_breaks
            ):
                out_b[-1] = right
                continue
            out_a.append(left)
            out_b.append(right)
            out_h.append(height)
        self._piece_a = np.asarray(out_a, dtype=float)
        self._piece_b = np.asarray(out_b, dtype=float)
        self._piece_h = np.asarray(out_h, dtype=float)

    @staticmethod
    def dirac(x: float) -> "Measure1D":
        """Returns the point mass at x."""
        return Measure1D(atoms=[(x, 1.0)])

    @staticmethod
    def uniform(a: float, b: float) -> "Measure1D":
        """Returns the uniform probability measure on [a, b)."""
        if not b > a:
            raise ValueError(f"uniform measure needs a < b, got [{a}, {b})")
        return Measure1D(pieces=[(a, b, 1.0 / (b - a))])

    @staticmethod
    def empirical(samples: Sequence[float]) -> "Measure1D":
        """Returns the empirical measure: one atom of mass 1/N per sample."""
        values = np.asarray(samples, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("samples must not be empty")
        return Measure1D._from_arrays(
            values, np.full(values.size, 1.0 / values.size), [], [], []
        )

    @staticmethod
    def mixture(
        weights: Sequence[float], measures: Sequence["Measure1D"]
    ) -> "Measure1D":
        """Returns sum_i weights[i] * measures[i]."""
        if len(weights) != len(measures):
            raise ValueError("weights and measures must have equal length")
        locs, masses, pa, pb, ph = [], [], [], [], []
        for weight, measure in zip(weights, measures):
            if weight < 0:
                raise ValueError(f"mixture weight {weight} is negative")
            if weight == 0:
                continue
            locs.append(measure._atom_loc)
            masses.append(weight * measure._atom_mass)
            pa.append(measure._piece_a)
            pb.append(measure._piece_b)
            ph.append(weight * measure._piece_h)

        def cat(parts):
            return np.concatenate(parts) if parts else np.zeros(0)

        return Measure1D._from_arrays(
            cat(locs), cat(masses), cat(pa), cat(pb), cat(ph)
        )

    @property
    def atoms(self) -> List[Atom]:
        return list(zip(self._atom_loc.tolist(), self._atom_mass.tolist()))

    @property
    def pieces(self) -> List[Piece]:
        return list(
            zip(
                self._piece_a.tolist(),
                self._piece_b.tolist(),
                self._piece_h.tolist(),
            )
        )

    @property
    def total_mass(self) -> float:
        return float(
            self._atom_mass.sum()
            + (self._piece_h * (self._piece_b - self._piece_a)).sum()
        )

    def support(self) -> Optional[Tuple[float, float]]:
        """Returns the smallest closed interval containing the measure's
        support, or None for the zero measure."""
        ends = np.concatenate((self._atom_loc, self._piece_a, self._piece_b))
        if ends.size == 0:
            return None
        return float(ends.min()), float(ends.max())

    def is_probability(self, tolerance: float = TOLERANCE) -> bool:
        return abs(self.total_mass - 1.0) <= tolerance

    def check_probability(self, name: str = "measure"):
        """Raises MeasureValidationException if the total mass is not 1."""
        mass = self.total_mass
        if abs(mass - 1.0) > TOLERANCE:
            raise MeasureValidationException(
                f"{name} is not a probability measure: total mass "
                f"{mass:.17g}",
                mass=mass,
            )

    def mass_of(self, interval: Interval) -> float:
        """Returns the measure of the given interval."""
        atom_mass = self._atom_mass[
            interval.contains_array(self._atom_loc)
        ].sum()
        overlap = np.clip(
            np.minimum(self._piece_b, interval.b)
            - np.maximum(self._piece_a, interval.a),
            0.0,
            None,
        )
        return float(atom_mass + (overlap * self._piece_h).sum())

    def cdf(self, x: float) -> float:
        """Returns mu((-inf, x])."""
        atom_mass = self._atom_mass[self._atom_loc <= x + TOLERANCE].sum()
        covered = np.clip(
            np.minimum(self._piece_b, x) - self._piece_a, 0.0, None
        )
        return float(atom_mass + (covered * self._piece_h).sum())

    def isclose(self, other: "Measure1D", tolerance: float = TOLERANCE):
        """True if both canonical forms agree within tolerance."""
        if self._atom_loc.size != other._atom_loc.size:
            return False
        if self._piece_a.size != other._piece_a.size:
            return False
        pairs = (
            (self._atom_loc, other._atom_loc),
            (self._atom_mass, other._atom_mass),
            (self._piece_a, other._piece_a),
            (self._piece_b, other._piece_b),
            (self._piece_h, other._piece_h),
        )
        return all(
            np.all(np.abs(mine - theirs) <= tolerance)
            for mine, theirs in pairs
        )

    def __eq__(self, other):
        if not isinstance(other, Measure1D):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None  # type: ignore[assignment]

    def to_text(self) -> str:
        """Serializes the measure as `atom <loc> <mass>` and
        `piece <a> <b> <height>` lines."""
        lines = [f"atom {loc:.17g} {mass:.17g}" for loc, mass in self.atoms]
        lines += [
            f"piece {a:.17g} {b:.17g} {h:.17g}" for a, b, h in self.pieces
        ]
        return "\n".join(lines)

    @staticmethod
    def from_text(text: str) -> "Measure1D":
        """Parses the text form written by to_text(). Blank lines and lines
        starting with '#' are ignored."""
        atoms, pieces = [], []
        for index, line in enumerate(text.splitlines(), 1):
            fields = line.split()
            if not fields or fields[0].startswith("#"):
                continue
            try:
                values = [float(v) for v in fields[1:]]
            except ValueError:
                raise MeasureValidationException(
                    f"Line {index} contains a non-numeric value: {line}"
                )
            if fields[0] == "atom" and len(values) == 2:
                atoms.append(values)
            elif fields[0] == "piece" and len(values) == 3:
                pieces.append(values)
            else:
                raise MeasureValidationException(
                    f"Line {index} is not an atom or piece record: {line}"
                )
        return Measure1D(atoms=atoms, pieces=pieces)

    def __str__(self):
        return f"Measure1D(atoms={self.atoms}, pieces={self.pieces})"

    __repr__ = __str__


class PiecewisePolynomial:
    """A piecewise polynomial function of degree at most 3 on a closed
    interval. Piece i applies on [breakpoints[i], breakpoints[i+1]); the last
    piece also covers the right end of the domain.

    :param breakpoints: Strictly increasing sequence of at least two reals.
    :param coefficients: One coefficient sequence per piece, lowest degree
        first.
    """

    def __init__(
        self,
        breakpoints: Sequence[float],
        coefficients: Sequence[Sequence[float]],
    ):
        grid = np.asarray(breakpoints, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("at least two breakpoints are required")
        if not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0):
            raise ValueError("breakpoints must be finite and increasing")
        if len(coefficients) != grid.size - 1:
            raise ValueError(
                f"expected {grid.size - 1} coefficient sequences, got "
                f"{len(coefficients)}"
            )
        table = np.zeros((grid.size - 1, MAX_DEGREE + 1))
        for index, coeffs in enumerate(coefficients):
            coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
            if coeffs.size > MAX_DEGREE + 1:
                raise ValueError(
                    f"piece {index} has degree {coeffs.size - 1}, the cap is "
                    f"{MAX_DEGREE}"
                )
            table[index, : coeffs.size] = coeffs
        self._breakpoints = grid
        self._coefficients = table

    @staticmethod
    def constant(value: float, lo: float, hi: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial([lo, hi], [[value]])

    @staticmethod
    def polynomial(
        coefficients: Sequence[float], lo: float, hi: float
    ) -> "PiecewisePolynomial":
        return PiecewisePolynomial([lo, hi], [coefficients])

    @property
    def breakpoints(self) -> np.ndarray:
        return self._breakpoints.copy()

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefficients.copy()

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self._breakpoints[0]), float(self._breakpoints[-1])

    def covers(self, lo: float, hi: float) -> bool:
        start, end = self.domain
        return lo >= start - TOLERANCE and hi <= end + TOLERANCE

    def piece_index(self, x: np.ndarray) -> np.ndarray:
        index = np.searchsorted(self._breakpoints, x, side="right") - 1
        return np.clip(index, 0, self._coefficients.shape[0] - 1)

    def __call__(self, x):
        values = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(values < lo - TOLERANCE) or np.any(values > hi + TOLERANCE):
            raise ValueError(f"function is undefined outside [{lo}, {hi}]")
        coeffs = self._coefficients[self.piece_index(values)]
        result = _horner(coeffs, values)
        return float(result) if np.ndim(x) == 0 else result

    def sup_abs(self) -> float:
        """Returns max |f(x)| over the domain."""
        low, high = self.bounds()
        return max(abs(low), abs(high))

    def bounds(self) -> Tuple[float, float]:
        """Returns (min f, max f) over the domain."""
        low, high = math.inf, -math.inf
        for i, coeffs in enumerate(self._coefficients):
            a, b = self._breakpoints[i], self._breakpoints[i + 1]
            candidates = [a, b]
            if np.any(coeffs[2:]):
                # interior extrema of a nonlinear piece
                roots = np.atleast_1d(npoly.polyroots(npoly.polyder(coeffs)))
                candidates += [
                    r.real
                    for r in roots
                    if abs(r.imag) <= 1e-12 and a <= r.real <= b
                ]
            values = npoly.polyval(np.asarray(candidates), coeffs)
            low = min(low, float(values.min()))
            high = max(high, float(values.max()))
        return low, high

    def to_json(self) -> dict:
        return {
            "breakpoints": self._breakpoints.tolist(),
            "coefficients": self._coefficients.tolist(),
        }

    @staticmethod
    def from_json(json) -> "PiecewisePolynomial":
        return PiecewisePolynomial(json["breakpoints"], json["coefficients"])


def _horner(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluates row-wise polynomials coeffs[..., k] * x**k."""
    result = np.zeros(np.broadcast(coeffs[..., 0], x).shape)
    for k in range(coeffs.shape[-1] - 1, -1, -1):
        result = result * x + coeffs[..., k]
    return result


def _antiderivatives(coeffs: np.ndarray) -> np.ndarray:
    """Row-wise antiderivatives with zero constant term."""
    powers = np.arange(1, coeffs.shape[-1] + 1, dtype=float)
    return np.concatenate(
        (np.zeros(coeffs.shape[:-1] + (1,)), coeffs / powers), axis=-1
    )


def _check_pair(mu: Measure1D, nu: Measure1D):
    mu.check_probability("first measure")
    nu.check_probability("second measure")


def tv_distance(mu: Measure1D, nu: Measure1D) -> float:
    """Returns the total variation distance, factor-2 convention: the sum of
    absolute atom mass differences plus the L1 distance of the densities.
    The result lies in [0, 2]."""
    _check_pair(mu, nu)
    grid = _snap(np.concatenate((mu._atom_loc, nu._atom_loc)))
    atom_part = 0.0
    if grid.size:
        first = np.bincount(
            _grid_index(grid, mu._atom_loc),
            weights=mu._atom_mass,
            minlength=grid.size,
        )
        second = np.bincount(
            _grid_index(grid, nu._atom_loc),
            weights=nu._atom_mass,
            minlength=grid.size,
        )
        atom_part = float(np.abs(first - second).sum())
    grid, (h_mu, h_nu) = _common_densities(mu, nu)
    piece_part = float((np.abs(h_mu - h_nu) * np.diff(grid)).sum())
    return min(atom_part + piece_part, 2.0)


def _densities_on(grid: np.ndarray, measure: Measure1D) -> np.ndarray:
    heights = np.zeros(max(grid.size - 1, 0))
    if measure._piece_a.size == 0 or grid.size < 2:
        return heights
    delta = np.zeros(grid.size)
    np.add.at(delta, _grid_index(grid, measure._piece_a), measure._piece_h)
    np.add.at(delta, _grid_index(grid, measure._piece_b), -measure._piece_h)
    return np.cumsum(delta)[:-1]


def _common_densities(*measures: Measure1D):
    grid = _snap(
        np.concatenate(
            [m._piece_a for m in measures] + [m._piece_b for m in measures]
        )
    )
    return grid, [_densities_on(grid, m) for m in measures]


def w1_distance(
    mu: Measure1D,
    nu: Measure1D,
    interval: Optional[Tuple[float, float]] = None,
) -> float:
    """Returns the Wasserstein-1 distance, computed exactly as the integral
    of |F_mu - F_nu|, where both CDFs are piecewise linear with jumps.

    :param interval: (Optional) declared bounded interval (lo, hi) that must
        contain both supports.
    """
    _check_pair(mu, nu)
    for measure in (mu, nu):
        support = measure.support()
        if support is None or not all(math.isfinite(s) for s in support):
            raise UnboundedSupportException("measure has unbounded support")
        if interval is not None and (
            support[0] < interval[0] - TOLERANCE
            or support[1] > interval[1] + TOLERANCE
        ):
            raise UnboundedSupportException(
                f"support [{support[0]}, {support[1]}] exceeds the declared "
                f"interval [{interval[0]}, {interval[1]}]"
            )
    grid = _snap(
        np.concatenate(
            (
                mu._atom_loc,
                nu._atom_loc,
                mu._piece_a,
                mu._piece_b,
                nu._piece_a,
                nu._piece_b,
            )
        )
    )
    if grid.size < 2:
        return 0.0
    widths = np.diff(grid)
    right_values = []
    slopes = []
    for measure in (mu, nu):
        heights = _densities_on(grid, measure)
        atom_mass = np.bincount(
            _grid_index(grid, measure._atom_loc),
            weights=measure._atom_mass,
            minlength=grid.size,
        )
        piece_mass = np.concatenate(([0.0], np.cumsum(heights * widths)))
        right_values.append(np.cumsum(atom_mass) + piece_mass)
        slopes.append(heights)
    d0 = (right_values[0] - right_values[1])[:-1]
    slope = slopes[0] - slopes[1]
    d1 = d0 + slope * widths
    same_sign = d0 * d1 >= 0
    area = np.where(
        same_sign,
        0.5 * widths * np.abs(d0 + d1),
        widths
        * (d0 * d0 + d1 * d1)
        / (2.0 * np.where(same_sign, 1.0, np.abs(d1 - d0))),
    )
    return float(area.sum())


def setwise_gap(
    mu: Measure1D, nu: Measure1D, family: Sequence[Interval]
) -> float:
    """Returns max over the family of |mu(B) - nu(B)|."""
    if len(family) == 0:
        raise ValueError("set family must not be empty")
    return max(abs(mu.mass_of(b) - nu.mass_of(b)) for b in family)


def integrate(mu: Measure1D, f: PiecewisePolynomial) -> float:
    """Returns the exact integral of f against mu."""
    lo, hi = f.domain
    support = mu.support()
    if support is None:
        return 0.0
    if support[0] < lo - TOLERANCE or support[1] > hi + TOLERANCE:
        raise ValueError(
            f"f is undefined on part of the support [{support[0]}, "
            f"{support[1]}]; its domain is [{lo}, {hi}]"
        )
    total = float((f(mu._atom_loc) * mu._atom_mass).sum())
    if mu._piece_a.size == 0:
        return total
    anti = _antiderivatives(f._coefficients)
    lefts = np.maximum(mu._piece_a[:, None], f._breakpoints[None, :-1])
    rights = np.minimum(mu._piece_b[:, None], f._breakpoints[None, 1:])
    active = rights > lefts
    values = _horner(anti[None, :, :], rights) - _horner(
        anti[None, :, :], lefts
    )
    weighted = np.where(active, values, 0.0) * mu._piece_h[:, None]
    total += float(weighted.sum())
    return total


def pushforward_affine(mu: Measure1D, scale: float, shift: float) -> Measure1D:
    """Returns the image of mu under x -> scale * x + shift."""
    if scale == 0:
        raise ValueError("scale must be nonzero")
    a = scale * mu._piece_a + shift
    b = scale * mu._piece_b + shift
    return Measure1D._from_arrays(
        scale * mu._atom_loc + shift,
        mu._atom_mass,
        np.minimum(a, b),
        np.maximum(a, b),
        mu._piece_h / abs(scale),
    )


def sample(mu: Measure1D, rng: np.random.Generator, size=None):
    """Draws from mu by inverse-CDF sampling. Returns a float if size is None,
    else an array of the given size."""
    starts = np.concatenate((mu._atom_loc, mu._piece_a))
    order_key = np.concatenate(
        (np.zeros(mu._atom_loc.size), np.ones(mu._piece_a.size))
    )
    masses = np.concatenate(
        (mu._atom_mass, mu._piece_h * (mu._piece_b - mu._piece_a))
    )
    heights = np.concatenate((np.zeros(mu._atom_loc.size), mu._piece_h))
    order = np.lexsort((order_key, starts))
    starts, masses, heights = starts[order], masses[order], heights[order]
    cumulative = np.cumsum(masses)
    u = rng.random(size) * cumulative[-1]
    index = np.minimum(
        np.searchsorted(cumulative, u, side="right"), cumulative.size - 1
    )
    previous = np.where(index > 0, cumulative[index - 1], 0.0)
    offset = np.where(
        heights[index] > 0,
        (u - previous) / np.where(heights[index] > 0, heights[index], 1.0),
        0.0,
    )
    draws = starts[index] + offset
    return float(draws) if size is None else draws


def cell_masses_and_integrals(
    mu: Measure1D,
    grid: np.ndarray,
    points: np.ndarray,
    interval_coefficients: Optional[np.ndarray] = None,
    point_values: Optional[np.ndarray] = None,
):
    """Splits mu over the cells of a partition given by elementary intervals
    [grid[i], grid[i+1]) and a set of points that take precedence over the
    intervals. Atoms at the last grid value belong to the last interval.

    :param interval_coefficients: (Optional) one polynomial per interval,
        shape (len(grid) - 1, MAX_DEGREE + 1), to integrate over each cell.
    :param point_values: (Optional) function value at each point.
    :return: tuple (interval_masses, point_masses, interval_integrals,
        point_integrals); integrals are None when no function is given.
    """
    n_cells = grid.size - 1
    interval_mass = np.zeros(n_cells)
    point_mass = np.zeros(points.size)
    interval_integral = (
        np.zeros(n_cells) if interval_coefficients is not None else None
    )
    point_integral = (
        np.zeros(points.size) if point_values is not None else None
    )

    loc, mass = mu._atom_loc, mu._atom_mass
    if loc.size:
        at_point = np.zeros(loc.size, dtype=bool)
        if points.size:
            nearest = np.clip(
                np.searchsorted(points, loc), 0, points.size - 1
            )
            left = np.clip(nearest - 1, 0, points.size - 1)
            hit_right = np.abs(points[nearest] - loc) <= TOLERANCE
            hit_left = np.abs(points[left] - loc) <= TOLERANCE
            at_point = hit_right | hit_left
            which = np.where(hit_right, nearest, left)
            np.add.at(point_mass, which[at_point], mass[at_point])
            if point_integral is not None:
                np.add.at(
                    point_integral,
                    which[at_point],
                    mass[at_point] * point_values[which[at_point]],
                )
        rest = ~at_point
        if np.any(
            (loc[rest] < grid[0] - TOLERANCE)
            | (loc[rest] > grid[-1] + TOLERANCE)
        ):
            raise ValueError("measure has atoms outside the partition")
        cells = np.clip(_grid_index(grid, loc[rest]), 0, n_cells - 1)
        np.add.at(interval_mass, cells, mass[rest])
        if interval_integral is not None:
            values = _horner(interval_coefficients[cells], loc[rest])
            np.add.at(interval_integral, cells, mass[rest] * values)

    if mu._piece_a.size:
        lefts = np.maximum(mu._piece_a[:, None], grid[None, :-1])
        rights = np.minimum(mu._piece_b[:, None], grid[None, 1:])
        active = rights > lefts
        overlap = np.where(active, rights - lefts, 0.0)
        interval_mass += (overlap * mu._piece_h[:, None]).sum(axis=0)
        if interval_integral is not None:
            anti = _antiderivatives(interval_coefficients)
            values = _horner(anti[None, :, :], rights) - _horner(
                anti[None, :, :], lefts
            )
            interval_integral += (
                np.where(active, values, 0.0) * mu._piece_h[:, None]
            ).sum(axis=0)
    return interval_mass, point_mass, interval_integral, point_integral


def square_wave_pair(n: int) -> Tuple[Measure1D, Measure1D]:
    """Returns the densities f_n = (1 + h_n) and g_n = (1 - h_n) on [0, 1],
    where h_n is +1 on the left halves L and -1 on the right halves R of the
    n cells [(k-1)/n, k/n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    left, right = square_wave_halves(n)
    f = Measure1D(pieces=[(a, b, 2.0) for a, b in left])
    g = Measure1D(pieces=[(a, b, 2.0) for a, b in right])
    return f, g


def square_wave_halves(
    n: int,
) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """Returns the intervals L_{n,k} = [(2k-2)/2n, (2k-1)/2n) and
    R_{n,k} = [(2k-1)/2n, k/n) for k = 1..n."""
    left = [
        ((2 * k - 2) / (2 * n), (2 * k - 1) / (2 * n)) for k in range(1, n + 1)
    ]
    right = [((2 * k - 1) / (2 * n), k / n) for k in range(1, n + 1)]
    return left, right


def dyadic_family(levels: int) -> List[Interval]:
    """Returns the closed intervals [0, j / 2**levels], j = 1..2**levels."""
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    count = 2 ** levels
    return [Interval.closed(0.0, j / count) for j in range(1, count + 1)]

