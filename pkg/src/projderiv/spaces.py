"""Model spaces: finite l_p truncations, the l_1 / l_inf pair, and grid
functions on [0, 1] paired with finite signed atomic measures.

Sequence spaces are truncated to a fixed dimension N; every construction used
downstream perturbs only finitely many coordinates, so truncation preserves
the implemented formulas exactly. Functions on [0, 1] are represented by
samples on a uniform grid, and atomic measures snap their support to grid
nodes so that pairings reduce to exact finite sums.

All values are immutable after construction and every operation is pure,
which makes the module safe for unrestricted concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

KIND_LP = "Lp"
KIND_L1 = "L1"
KIND_C01 = "C01"

__all__ = [
    "KIND_LP",
    "KIND_L1",
    "KIND_C01",
    "SpaceMismatchError",
    "SpaceSpec",
    "PrimalVector",
    "DualVector",
    "IndexSet",
    "L1DualitySelection",
    "lp_space",
    "l1_space",
    "c01_space",
    "primal",
    "dual",
    "atomic_measure",
    "norm",
    "dual_norm",
    "pairing",
    "duality_map",
    "duality_map_l1_selection",
    "duality_map_inverse",
    "norming_direction",
    "norm_rows",
    "pairing_rows",
]


class SpaceMismatchError(ValueError):
    """Two values from different model spaces were combined."""


@dataclass(frozen=True)
class SpaceSpec:
    """Description of a model space.

    kind "Lp":  length-``dim`` sequences with the p-norm, 1 < p < inf; the
                dual carries the conjugate q-norm.
    kind "L1":  length-``dim`` sequences with the 1-norm; the dual carries
                the max norm.
    kind "C01": functions on [0, 1] sampled at ``grid_size`` uniform nodes
                with the max norm; dual elements are finite signed atomic
                measures with total-variation norm.
    """

    kind: str
    p: float | None = None
    dim: int | None = None
    grid_size: int | None = None

    def __post_init__(self):
        if self.kind == KIND_LP:
            if self.p is None or not (1.0 < float(self.p) < np.inf):
                raise ValueError("Lp spaces need a finite exponent p in (1, inf)")
            if self.dim is None or self.dim < 1:
                raise ValueError("Lp spaces need dim >= 1")
            if self.grid_size is not None:
                raise ValueError("grid_size is a C01 parameter")
        elif self.kind == KIND_L1:
            if self.dim is None or self.dim < 1:
                raise ValueError("L1 spaces need dim >= 1")
            if self.p is not None or self.grid_size is not None:
                raise ValueError("L1 spaces take only dim")
        elif self.kind == KIND_C01:
            if self.grid_size is None or self.grid_size < 2:
                raise ValueError("C01 spaces need grid_size >= 2")
            if self.p is not None or self.dim is not None:
                raise ValueError("C01 spaces take only grid_size")
        else:
            raise ValueError(f"unknown space kind {self.kind!r}")

    @property
    def q(self) -> float:
        """Conjugate exponent, 1/p + 1/q = 1 (Lp only)."""
        if self.kind != KIND_LP:
            raise ValueError("conjugate exponent is defined for Lp spaces only")
        return self.p / (self.p - 1.0)

    @property
    def size(self) -> int:
        return self.grid_size if self.kind == KIND_C01 else self.dim

    @property
    def grid(self) -> np.ndarray:
        """Uniform nodes 0 = t_1 < ... < t_G = 1 (C01 only)."""
        if self.kind != KIND_C01:
            raise ValueError("only C01 spaces carry a grid")
        g = np.linspace(0.0, 1.0, self.grid_size)
        g.setflags(write=False)
        return g


def lp_space(p: float, dim: int) -> SpaceSpec:
    return SpaceSpec(kind=KIND_LP, p=float(p), dim=int(dim))


def l1_space(dim: int) -> SpaceSpec:
    return SpaceSpec(kind=KIND_L1, dim=int(dim))


def c01_space(grid_size: int = 513) -> SpaceSpec:
    return SpaceSpec(kind=KIND_C01, grid_size=int(grid_size))


def _freeze(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("vector values must be one dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PrimalVector:
    """An element of a model space: coordinates for Lp/L1, grid samples
    for C01."""

    space: SpaceSpec
    values: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.values)
        if arr.size != self.space.size:
            raise ValueError(
                f"expected {self.space.size} entries, got {arr.size}"
            )
        object.__setattr__(self, "values", arr)

    @classmethod
    def zero(cls, space: SpaceSpec) -> "PrimalVector":
        return cls(space, np.zeros(space.size))

    def _same_space(self, other: "PrimalVector") -> None:
        if self.space != other.space:
            raise SpaceMismatchError("primal vectors live in different spaces")

    def __add__(self, other: "PrimalVector") -> "PrimalVector":
        self._same_space(other)
        return PrimalVector(self.space, self.values + other.values)

    def __sub__(self, other: "PrimalVector") -> "PrimalVector":
        self._same_space(other)
        return PrimalVector(self.space, self.values - other.values)

    def __mul__(self, scalar: float) -> "PrimalVector":
        return PrimalVector(self.space, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "PrimalVector":
        return PrimalVector(self.space, -self.values)


def primal(space: SpaceSpec, values) -> PrimalVector:
    return PrimalVector(space, values)


@dataclass(frozen=True, eq=False)
class DualVector:
    """An element of the dual model.

    For Lp primal spaces the entries are q-norm coordinates, for L1 they are
    max-norm coordinates. For C01 the functional is a finite signed atomic
    measure: ``atoms`` holds (location, weight) pairs with locations snapped
    to the nearest grid node (``snap_distance`` records the largest move).
    Exactly one of ``values`` / ``atoms`` is populated.
    """

    space: SpaceSpec
    values: np.ndarray | None = None
    atoms: tuple[tuple[float, float], ...] | None = None
    snap_distance: float = 0.0

    def __post_init__(self):
        if self.space.kind == KIND_C01:
            if self.values is not None or self.atoms is None:
                raise ValueError("C01 duals are atomic measures")
            grid = self.space.grid
            g = self.space.grid_size
            snapped = {}
            max_move = 0.0
            for loc, weight in self.atoms:
                loc = float(loc)
                weight = float(weight)
                if not (0.0 <= loc <= 1.0):
                    raise ValueError("atom locations must lie in [0, 1]")
                if not np.isfinite(weight):
                    raise ValueError("atom weights must be finite")
                idx = int(round(loc * (g - 1)))
                max_move = max(max_move, abs(grid[idx] - loc))
                if idx in snapped:
                    raise ValueError("duplicate atom locations after snapping")
                if weight != 0.0:
                    snapped[idx] = weight
            idxs = tuple(sorted(snapped))
            object.__setattr__(
                self, "atoms", tuple((float(grid[i]), snapped[i]) for i in idxs)
            )
            object.__setattr__(self, "_indices", idxs)
            object.__setattr__(self, "snap_distance", max(max_move, self.snap_distance))
        else:
            if self.atoms is not None or self.values is None:
                raise ValueError("sequence-space duals carry coordinates")
            arr = _freeze(self.values)
            if arr.size != self.space.size:
                raise ValueError(
                    f"expected {self.space.size} entries, got {arr.size}"
                )
            object.__setattr__(self, "values", arr)
            object.__setattr__(self, "_indices", None)

    @property
    def atom_indices(self) -> tuple[int, ...]:
        if self.space.kind != KIND_C01:
            raise ValueError("only atomic measures have atom indices")
        return self._indices

    @property
    def atom_weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)

    @classmethod
    def zero(cls, space: SpaceSpec) -> "DualVector":
        if space.kind == KIND_C01:
            return cls(space, atoms=())
        return cls(space, values=np.zeros(space.size))

    def _same_space(self, other: "DualVector") -> None:
        if self.space != other.space:
            raise SpaceMismatchError("dual vectors live in different spaces")

    def _combine(self, other: "DualVector", sign: float) -> "DualVector":
        self._same_space(other)
        if self.space.kind == KIND_C01:
            grid = self.space.grid
            acc: dict[int, float] = {}
            for idx, (_, w) in zip(self.atom_indices, self.atoms):
                acc[idx] = acc.get(idx, 0.0) + w
            for idx, (_, w) in zip(other.atom_indices, other.atoms):
                acc[idx] = acc.get(idx, 0.0) + sign * w
            atoms = tuple(
                (float(grid[i]), acc[i]) for i in sorted(acc) if acc[i] != 0.0
            )
            return DualVector(self.space, atoms=atoms)
        return DualVector(self.space, values=self.values + sign * other.values)

    def __add__(self, other: "DualVector") -> "DualVector":
        return self._combine(other, 1.0)

    def __sub__(self, other: "DualVector") -> "DualVector":
        return self._combine(other, -1.0)

    def __mul__(self, scalar: float) -> "DualVector":
        scalar = float(scalar)
        if self.space.kind == KIND_C01:
            atoms = tuple((loc, w * scalar) for loc, w in self.atoms if w * scalar != 0.0)
            return DualVector(self.space, atoms=atoms)
        return DualVector(self.space, values=self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "DualVector":
        return self * -1.0


def dual(space: SpaceSpec, values) -> DualVector:
    return DualVector(space, values=values)


def atomic_measure(space: SpaceSpec, atoms: Iterable[tuple[float, float]]) -> DualVector:
    return DualVector(space, atoms=tuple(atoms))


@dataclass(frozen=True)
class IndexSet:
    """A finite subset M of {1, ..., N} inside the truncation, with its
    complement computed within the same truncation."""

    members: frozenset[int]
    universe: int

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(i) for i in self.members))
        if any(i < 1 or i > self.universe for i in self.members):
            raise ValueError("index set members must lie in 1..universe")

    @property
    def complement(self) -> "IndexSet":
        rest = frozenset(range(1, self.universe + 1)) - self.members
        return IndexSet(rest, self.universe)

    @property
    def mask(self) -> np.ndarray:
        """Boolean mask over 0-based coordinates."""
        m = np.zeros(self.universe, dtype=bool)
        for i in self.members:
            m[i - 1] = True
        m.setflags(write=False)
        return m


# ---------------------------------------------------------------------------
# norms and pairings
# ---------------------------------------------------------------------------

def norm(v: PrimalVector) -> float:
    """Primal norm: p-norm (Lp), 1-norm (L1), grid max (C01)."""
    kind = v.space.kind
    if kind == KIND_LP:
        return float(np.sum(np.abs(v.values) ** v.space.p) ** (1.0 / v.space.p))
    if kind == KIND_L1:
        return float(np.sum(np.abs(v.values)))
    return float(np.max(np.abs(v.values)))


def norm_rows(space: SpaceSpec, rows: np.ndarray) -> np.ndarray:
    """Primal norm of each row of a (m, size) array."""
    rows = np.asarray(rows, dtype=float)
    if space.kind == KIND_LP:
        return np.sum(np.abs(rows) ** space.p, axis=1) ** (1.0 / space.p)
    if space.kind == KIND_L1:
        return np.sum(np.abs(rows), axis=1)
    return np.max(np.abs(rows), axis=1)


def dual_norm(w: DualVector) -> float:
    """Dual norm: q-norm (Lp primal), max norm (L1 primal), total variation
    (atomic measures)."""
    kind = w.space.kind
    if kind == KIND_LP:
        q = w.space.q
        return float(np.sum(np.abs(w.values) ** q) ** (1.0 / q))
    if kind == KIND_L1:
        return float(np.max(np.abs(w.values))) if w.values.size else 0.0
    if not w.atoms:
        return 0.0
    return float(np.sum(np.abs(w.atom_weights)))


def pairing(w: DualVector, v: PrimalVector) -> float:
    """Canonical pairing <w, v>: coordinate dot product, or the exact atomic
    sum  sum_i weight_i * v(t_i)  with atoms snapped to grid nodes."""
    if w.space != v.space:
        raise SpaceMismatchError("pairing needs matching spaces")
    if w.space.kind == KIND_C01:
        if not w.atoms:
            return 0.0
        idx = np.array(w.atom_indices, dtype=int)
        return float(np.dot(w.atom_weights, v.values[idx]))
    return float(np.dot(w.values, v.values))


def pairing_rows(w: DualVector, rows: np.ndarray) -> np.ndarray:
    """Pairing of one dual vector against each row of a (m, size) array."""
    rows = np.asarray(rows, dtype=float)
    if w.space.kind == KIND_C01:
        if not w.atoms:
            return np.zeros(rows.shape[0])
        idx = np.array(w.atom_indices, dtype=int)
        return rows[:, idx] @ w.atom_weights
    return rows @ w.values


# ---------------------------------------------------------------------------
# duality mappings
# ---------------------------------------------------------------------------

def duality_map(v: PrimalVector) -> DualVector:
    """Normalized duality mapping on an Lp truncation.

    J(v)_i = |v_i|^(p-1) sign(v_i) / ||v||^(p-2), so that <J(v), v> = ||v||^2
    and ||J(v)||_q = ||v||. The origin maps to the dual origin, and p = 2
    returns the vector itself.
    """
    if v.space.kind != KIND_LP:
        raise ValueError("duality_map is defined on Lp spaces")
    p = v.space.p
    if p == 2.0:
        return DualVector(v.space, values=v.values.copy())
    nv = norm(v)
    if nv == 0.0:
        return DualVector.zero(v.space)
    vals = np.abs(v.values) ** (p - 1.0) * np.sign(v.values) / nv ** (p - 2.0)
    return DualVector(v.space, values=vals)


@dataclass(frozen=True)
class L1DualitySelection:
    """One selection of the set-valued l_1 duality mapping.

    ``degenerate`` is True only for the zero vector, where every selection
    rule is arbitrary and the dual origin is returned.
    """

    functional: DualVector
    degenerate: bool


def duality_map_l1_selection(v: PrimalVector) -> L1DualitySelection:
    """Selection j(v)_i = ||v||_1 * sign(v_i) with sign(0) := 0.

    Satisfies <j(v), v> = ||v||_1^2 and ||j(v)||_inf = ||v||_1 for v != 0.
    sign(0) := 0 is the symmetric choice among the admissible values in
    [-||v||_1, ||v||_1].
    """
    if v.space.kind != KIND_L1:
        raise ValueError("the l_1 selection is defined on L1 spaces")
    nv = norm(v)
    if nv == 0.0:
        return L1DualitySelection(DualVector.zero(v.space), degenerate=True)
    return L1DualitySelection(
        DualVector(v.space, values=nv * np.sign(v.values)), degenerate=False
    )


def duality_map_inverse(w: DualVector) -> PrimalVector:
    """Duality mapping of the dual space (exponent q), landing back in the
    primal: <w, j*(w)> = ||w||_*^2 and ||j*(w)|| = ||w||_*."""
    if w.space.kind != KIND_LP:
        raise ValueError("duality_map_inverse is defined on Lp spaces")
    q = w.space.q
    if q == 2.0:
        return PrimalVector(w.space, w.values.copy())
    nw = dual_norm(w)
    if nw == 0.0:
        return PrimalVector.zero(w.space)
    vals = np.abs(w.values) ** (q - 1.0) * np.sign(w.values) / nw ** (q - 2.0)
    return PrimalVector(w.space, vals)


def norming_direction(w: DualVector) -> PrimalVector:
    """A unit-norm primal direction g with <w, g> = ||w||_* (a norming
    vector for the functional). Returns the origin when w is the dual
    origin.

    Lp: the normalized inverse duality map. L1: a signed basis vector at the
    largest coordinate. C01: the piecewise-linear interpolant of the atom
    signs, extended flat beyond the support.
    """
    nw = dual_norm(w)
    if nw == 0.0:
        return PrimalVector.zero(w.space)
    kind = w.space.kind
    if kind == KIND_LP:
        j = duality_map_inverse(w)
        return PrimalVector(w.space, j.values / nw)
    if kind == KIND_L1:
        n = int(np.argmax(np.abs(w.values)))
        vals = np.zeros(w.space.size)
        vals[n] = np.sign(w.values[n])
        return PrimalVector(w.space, vals)
    locs = np.array([loc for loc, _ in w.atoms])
    signs = np.sign(w.atom_weights)
    vals = np.interp(w.space.grid, locs, signs)
    return PrimalVector(w.space, vals)
