"""Closed-form generalized adjoint derivatives (coderivatives) of the affine
and projection families, returned as symbolic dual sets with exact
membership tests.

Cases the closed forms do not cover are surfaced explicitly: boundary base
points raise `BoundaryCaseError`, and combinations that only the sampling
oracle can resolve raise `OracleOnlyError` instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import chebyshev, projections
from .spaces import (
    KIND_C01,
    KIND_L1,
    KIND_LP,
    DualVector,
    IndexSet,
    PrimalVector,
    SpaceSpec,
    dual_norm,
    duality_map,
    duality_map_l1_selection,
    norm,
    norm_rows,
    pairing,
)

__all__ = [
    "AFFINE",
    "BALL_PROJ",
    "CONE_PROJ",
    "L1_BALL_PROJ",
    "POLY_PROJ",
    "BoundaryCaseError",
    "OracleOnlyError",
    "MapDescriptor",
    "CoderivativeSet",
    "affine_map",
    "ball_projection_map",
    "cone_projection_map",
    "l1_ball_projection_map",
    "poly_projection_map",
    "coderiv_affine",
    "coderiv_ball_lp",
    "coderiv_cone_l2",
    "coderiv_cone_lp_theta_membership",
    "coderiv_cone_lp_at_origin",
    "coderiv_l1ball",
    "zm_index_set",
    "ZM_POSITIVITY_THRESHOLD",
]

AFFINE = "affine"
BALL_PROJ = "ball_proj"
CONE_PROJ = "cone_proj"
L1_BALL_PROJ = "l1_ball_proj"
POLY_PROJ = "poly_proj"

# strict positivity threshold used when classifying base points of the cone
ZM_POSITIVITY_THRESHOLD = 1e-12


class BoundaryCaseError(ValueError):
    """The base point sits on the set boundary, which the closed forms do
    not cover."""


class OracleOnlyError(ValueError):
    """No closed form exists for this combination; only the sampling oracle
    can resolve it."""


@dataclass(frozen=True, eq=False)
class MapDescriptor:
    """A closed description of one of the mapping families.

    affine:       f(u) = shift + scale * u (single valued everywhere).
    ball_proj:    nearest point of the radius-r ball in an Lp space.
    cone_proj:    componentwise clamp onto the positive cone (Lp or L1).
    l1_ball_proj: canonical selection (r/||u||_1) u of the set-valued l_1
                  ball projection.
    poly_proj:    best uniform polynomial approximation of degree <= degree
                  in C[0, 1] (single valued).
    """

    kind: str
    space: SpaceSpec
    shift: PrimalVector | None = None
    scale: float = 1.0
    radius: float | None = None
    degree: int | None = None

    def __post_init__(self):
        if self.kind == AFFINE:
            if self.shift is None or self.shift.space != self.space:
                raise ValueError("affine maps need a shift in the same space")
        elif self.kind == BALL_PROJ:
            if self.space.kind != KIND_LP or self.radius is None or self.radius <= 0:
                raise ValueError("ball projections need an Lp space and r > 0")
        elif self.kind == CONE_PROJ:
            if self.space.kind not in (KIND_LP, KIND_L1):
                raise ValueError("cone projections need a sequence space")
        elif self.kind == L1_BALL_PROJ:
            if self.space.kind != KIND_L1 or self.radius is None or self.radius <= 0:
                raise ValueError("l1 ball projections need an L1 space and r > 0")
        elif self.kind == POLY_PROJ:
            if self.space.kind != KIND_C01 or self.degree is None or self.degree < 0:
                raise ValueError("polynomial projections need a C01 space and degree >= 0")
        else:
            raise ValueError(f"unknown map kind {self.kind!r}")

    def value(self, u: PrimalVector) -> PrimalVector:
        """Single value, or the canonical selection for the l_1 ball."""
        if self.kind == AFFINE:
            return self.shift + self.scale * u
        if self.kind == BALL_PROJ:
            return projections.project_ball_lp(u, self.radius)
        if self.kind == CONE_PROJ:
            return projections.project_positive_cone(u)
        if self.kind == L1_BALL_PROJ:
            return projections.project_ball_l1_selection(u, self.radius).point
        result = chebyshev.remez(u, self.degree)
        return result.polynomial.on_grid(self.space)

    def value_batch(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized `value` over the rows of a (m, size) array."""
        rows = np.asarray(rows, dtype=float)
        if self.kind == AFFINE:
            return self.shift.values[None, :] + self.scale * rows
        if self.kind == CONE_PROJ:
            return np.maximum(rows, 0.0)
        if self.kind in (BALL_PROJ, L1_BALL_PROJ):
            norms = norm_rows(self.space, rows)
            inside = norms <= self.radius * (1.0 + projections.INSIDE_SLACK)
            factors = np.where(inside, 1.0, self.radius / np.where(norms == 0, 1.0, norms))
            return rows * factors[:, None]
        out = np.empty_like(rows)
        for i, row in enumerate(rows):
            out[i] = self.value(PrimalVector(self.space, row)).values
        return out

    def graph_contains(self, x: PrimalVector, y: PrimalVector, tol: float = 1e-9) -> bool:
        if x.space != self.space or y.space != self.space:
            return False
        if self.kind == L1_BALL_PROJ:
            return projections.l1_projection_set_contains(x, self.radius, y, tol=max(tol, 1e-12))
        scale = 1.0 + norm(x)
        return norm(y - self.value(x)) <= tol * scale

    def same_branch(self, x: PrimalVector, u: PrimalVector) -> bool:
        """Whether u lies in the same smooth piece of the map as x (used to
        keep directed rays away from branch crossings)."""
        if self.kind in (BALL_PROJ, L1_BALL_PROJ):
            r = self.radius
            return (norm(x) <= r) == (norm(u) <= r)
        if self.kind == CONE_PROJ:
            sx, su = np.sign(x.values), np.sign(u.values)
            active = sx != 0
            return bool(np.all(sx[active] == su[active]))
        return True


def affine_map(space: SpaceSpec, shift: PrimalVector, scale: float = 1.0) -> MapDescriptor:
    return MapDescriptor(AFFINE, space, shift=shift, scale=float(scale))


def ball_projection_map(space: SpaceSpec, radius: float) -> MapDescriptor:
    return MapDescriptor(BALL_PROJ, space, radius=float(radius))


def cone_projection_map(space: SpaceSpec) -> MapDescriptor:
    return MapDescriptor(CONE_PROJ, space)


def l1_ball_projection_map(space: SpaceSpec, radius: float) -> MapDescriptor:
    return MapDescriptor(L1_BALL_PROJ, space, radius=float(radius))


def poly_projection_map(space: SpaceSpec, degree: int) -> MapDescriptor:
    return MapDescriptor(POLY_PROJ, space, degree=int(degree))


# ---------------------------------------------------------------------------
# symbolic dual sets
# ---------------------------------------------------------------------------

EMPTY = "empty"
SINGLETON = "singleton"
ORDER_INTERVAL = "order_interval"
CONE_SLICE = "cone_slice"
WHOLE_DUAL = "whole_dual"
POSITIVE_CONE_DUAL = "positive_cone_dual"


@dataclass(frozen=True, eq=False)
class CoderivativeSet:
    """Symbolic value of a derivative operator (or of a fixed-point set)
    with an exact membership test.

    cone_slice(M, anchor y): z with z_i = y_i on M and 0 <= z_i <= y_i on
    the complement of M. positive_cone_dual(S): z with z_i >= 0 on S.
    """

    kind: str
    space: SpaceSpec
    point: DualVector | None = None
    lower: DualVector | None = None
    upper: DualVector | None = None
    index_set: IndexSet | None = None
    anchor: DualVector | None = None

    def __post_init__(self):
        if self.kind == SINGLETON and self.point is None:
            raise ValueError("singleton needs its point")
        if self.kind == ORDER_INTERVAL:
            if self.lower is None or self.upper is None:
                raise ValueError("order interval needs both endpoints")
            if np.any(self.lower.values > self.upper.values):
                raise ValueError("order interval needs lower <= upper componentwise")
        if self.kind == CONE_SLICE and (self.index_set is None or self.anchor is None):
            raise ValueError("cone slice needs an index set and an anchor")
        if self.kind == POSITIVE_CONE_DUAL and self.index_set is None:
            raise ValueError("positive cone dual needs its index set")

    def membership(self, w: DualVector, tol: float = 1e-9) -> bool:
        if w.space != self.space:
            return False
        if self.kind == EMPTY:
            return False
        if self.kind == WHOLE_DUAL:
            return True
        if self.kind == SINGLETON:
            scale = 1.0 + dual_norm(self.point)
            return dual_norm(w - self.point) <= tol * scale
        if self.kind == ORDER_INTERVAL:
            return bool(
                np.all(w.values >= self.lower.values - tol)
                and np.all(w.values <= self.upper.values + tol)
            )
        if self.kind == CONE_SLICE:
            on = self.index_set.mask
            off = ~on
            y = self.anchor.values
            z = w.values
            return bool(
                np.all(np.abs(z[on] - y[on]) <= tol)
                and np.all(z[off] >= -tol)
                and np.all(z[off] <= y[off] + tol)
            )
        on = self.index_set.mask
        return bool(np.all(w.values[on] >= -tol))


# ---------------------------------------------------------------------------
# closed-form operators
# ---------------------------------------------------------------------------

def coderiv_affine(mapd: MapDescriptor, x: PrimalVector, w: DualVector) -> CoderivativeSet:
    """Derivative operator of f(u) = shift + scale * u: the singleton
    {scale * w} at every base point (the adjoint of the derivative)."""
    if mapd.kind != AFFINE:
        raise ValueError("coderiv_affine needs an affine map")
    return CoderivativeSet(SINGLETON, mapd.space, point=mapd.scale * w)


def coderiv_ball_lp(x: PrimalVector, r: float, w: DualVector) -> CoderivativeSet:
    """Derivative operator of the Lp ball projection.

    Interior base: {w}. Exterior base:
    {(r/||x||) (w - (<w, x>/||x||^2) J(x))}, which collapses to {0} at
    w = J(x) and to {(r/||x||) w} when <w, x> = 0. Boundary base points are
    not covered and raise.
    """
    if x.space.kind != KIND_LP:
        raise ValueError("coderiv_ball_lp needs an Lp space")
    nx = norm(x)
    scale = max(1.0, abs(r))
    if abs(nx - r) <= 1e-12 * scale:
        raise BoundaryCaseError("base point on the sphere ||x|| = r is uncovered")
    if nx < r:
        return CoderivativeSet(SINGLETON, x.space, point=w)
    jx = duality_map(x)
    coeff = pairing(w, x) / nx**2
    image = (r / nx) * (w - coeff * jx)
    return CoderivativeSet(SINGLETON, x.space, point=image)


def zm_index_set(xbar: PrimalVector, threshold: float = ZM_POSITIVITY_THRESHOLD) -> IndexSet | None:
    """Index set M with xbar strictly positive on M and zero off M, or None
    when xbar has a negative (or sub-threshold nonzero) coordinate."""
    members = set()
    for i, v in enumerate(xbar.values, start=1):
        if v > threshold:
            members.add(i)
        elif abs(v) > threshold:
            return None
    return IndexSet(frozenset(members), xbar.space.size)


def coderiv_cone_l2(xbar: PrimalVector, m_set: IndexSet, y: DualVector) -> CoderivativeSet:
    """Derivative operator of the positive-cone projection in the Hilbert
    case (p = 2) at a base point positive exactly on M.

    y = 0 gives {0}; y nonnegative and strictly positive off M gives the
    slice {z : z = y on M, 0 <= z <= y off M}; y nonnegative with a zero
    coordinate off M gives {y}. Anything else is oracle-only.
    """
    if xbar.space.kind != KIND_LP or xbar.space.p != 2.0:
        raise ValueError("this closed form is specific to p = 2")
    derived = zm_index_set(xbar)
    if derived is None or derived.members != m_set.members:
        raise ValueError("base point is not positive exactly on M")
    if not m_set.members:
        raise ValueError("M must be nonempty")
    off = m_set.complement.mask
    yv = y.values
    if dual_norm(y) == 0.0:
        return CoderivativeSet(SINGLETON, xbar.space, point=DualVector.zero(xbar.space))
    if np.all(yv[off] > 0.0):
        return CoderivativeSet(CONE_SLICE, xbar.space, index_set=m_set, anchor=y)
    if np.all(yv[off] >= 0.0):
        return CoderivativeSet(SINGLETON, xbar.space, point=y)
    raise OracleOnlyError(
        "y has a negative coordinate off M: y is not a fixed point there and "
        "the full set is resolved only by the sampling oracle"
    )


def coderiv_cone_lp_theta_membership(f: PrimalVector, phi: DualVector) -> bool:
    """Whether the dual origin belongs to the derivative operator of the
    positive-cone projection at f, applied to phi. With counting measure on
    the truncation this holds iff no index has (phi_i != 0 and f_i > 0) or
    (phi_i < 0 and f_i <= 0)."""
    if f.space.kind != KIND_LP:
        raise ValueError("this test needs an Lp space")
    fv, pv = f.values, phi.values
    bad = ((pv != 0.0) & (fv > 0.0)) | ((pv < 0.0) & (fv <= 0.0))
    return not bool(np.any(bad))


def coderiv_cone_lp_at_origin(psi: DualVector) -> CoderivativeSet:
    """Derivative operator of the positive-cone projection at the origin:
    the order interval [0, psi] for componentwise nonnegative psi."""
    if psi.space.kind != KIND_LP:
        raise ValueError("this closed form needs an Lp space")
    if np.any(psi.values < 0.0):
        raise ValueError("psi must be componentwise nonnegative")
    return CoderivativeSet(
        ORDER_INTERVAL, psi.space, lower=DualVector.zero(psi.space), upper=psi
    )


def coderiv_l1ball(x: PrimalVector, r: float, phi: DualVector) -> CoderivativeSet:
    """Derivative operator of the set-valued l_1 ball projection at the
    canonical selection.

    Interior base: {phi}. Exterior base with strictly positive x: {0} for
    phi = 0 and the empty set for phi = j(x). Other exterior duals are
    resolved only by fixed-point queries against the oracle.
    """
    if x.space.kind != KIND_L1:
        raise ValueError("coderiv_l1ball needs an L1 space")
    nx = norm(x)
    scale = max(1.0, abs(r))
    if abs(nx - r) <= 1e-12 * scale:
        raise BoundaryCaseError("base point on the sphere ||x||_1 = r is uncovered")
    if nx < r:
        return CoderivativeSet(SINGLETON, x.space, point=phi)
    if dual_norm(phi) == 0.0:
        if not np.all(x.values > 0.0):
            raise OracleOnlyError("the exterior closed forms assume strictly positive x")
        return CoderivativeSet(SINGLETON, x.space, point=DualVector.zero(x.space))
    if not np.all(x.values > 0.0):
        raise OracleOnlyError("the exterior closed forms assume strictly positive x")
    jx = duality_map_l1_selection(x).functional
    if dual_norm(phi - jx) <= 1e-12 * (1.0 + dual_norm(jx)):
        return CoderivativeSet(EMPTY, x.space)
    raise OracleOnlyError(
        "exterior l_1 dual without a closed form; resolve via fixed-point queries"
    )
