"""Fixed points of the derivative operators: is y* a member of the operator's
value at y* itself, and what is the full fixed-point set?

A registry of closed-form characterizations answers queries exactly where a
characterization applies (whole dual space, origin only, or a nonnegativity
cone over an index set); everything else goes to the sampling oracle. In
audit mode both run and a contradiction fails loudly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import chebyshev
from .coderivatives import (
    AFFINE,
    BALL_PROJ,
    CONE_PROJ,
    L1_BALL_PROJ,
    POLY_PROJ,
    MapDescriptor,
    coderiv_ball_lp,
    zm_index_set,
)
from .limsup_oracle import (
    GraphPoint,
    LimsupEstimate,
    SamplingSchedule,
    Verdict,
    estimate_limsup,
    membership_test,
    tolerance_pair,
)
from .spaces import (
    KIND_C01,
    KIND_LP,
    DualVector,
    IndexSet,
    PrimalVector,
    SpaceSpec,
    atomic_measure,
    dual_norm,
    duality_map,
    norm,
    norming_direction,
    pairing,
)

__all__ = [
    "FixedPointQuery",
    "FixedPointCharacterization",
    "FixedPointAuditError",
    "ConvexityProbeReport",
    "ScalingDirectionReport",
    "WHOLE_DUAL",
    "ORIGIN_ONLY",
    "POSITIVE_CONE_DUAL",
    "ORACLE_ONLY",
    "characterize",
    "expected_coderivative_image",
    "registry_rays",
    "registry_verdict",
    "is_fixed_point",
    "quotient_forms_spread",
    "convexity_closedness_probe",
    "poly_annihilator",
    "poly_fixed_point_quotient",
    "scaling_direction_report",
    "query_report_json",
]

WHOLE_DUAL = "whole_dual"
ORIGIN_ONLY = "origin_only"
POSITIVE_CONE_DUAL = "positive_cone_dual"
ORACLE_ONLY = "oracle_only"


class FixedPointAuditError(AssertionError):
    """The oracle contradicted a closed-form characterization."""


@dataclass(frozen=True, eq=False)
class FixedPointQuery:
    map: MapDescriptor
    base: GraphPoint
    candidate: DualVector


@dataclass(frozen=True, eq=False)
class FixedPointCharacterization:
    """Closed form of the fixed-point set, where one exists.

    positive_cone_dual(S): duals nonnegative on the index set S (free
    elsewhere). oracle_only: no characterization; membership is decided by
    sampling.
    """

    kind: str
    space: SpaceSpec
    index_set: IndexSet | None = None

    def membership(self, w: DualVector, tol: float = 1e-9) -> bool:
        if self.kind == WHOLE_DUAL:
            return True
        if self.kind == ORIGIN_ONLY:
            return dual_norm(w) <= tol
        if self.kind == POSITIVE_CONE_DUAL:
            return bool(np.all(w.values[self.index_set.mask] >= -tol))
        raise ValueError("no closed-form membership for oracle-only bases")


def _is_canonical_selection(mapd: MapDescriptor, base: GraphPoint) -> bool:
    nx = norm(base.x)
    target = base.x if nx <= mapd.radius else (mapd.radius / nx) * base.x
    return norm(base.y - target) <= 1e-12 * (1.0 + nx)


def characterize(mapd: MapDescriptor, base: GraphPoint) -> FixedPointCharacterization:
    """Closed-form fixed-point set of the derivative operator at the base.

    Translations and interior projection bases give the whole dual space;
    exterior ball and exterior canonical l_1 bases, and affine maps with a
    nonzero shift and scale != 1, pin the origin only; the Hilbert cone at a
    base positive exactly on M gives nonnegativity off M. Uncovered bases
    are oracle-only.
    """
    space = mapd.space
    if mapd.kind == AFFINE:
        if mapd.scale == 1.0:
            return FixedPointCharacterization(WHOLE_DUAL, space)
        if norm(mapd.shift) > 0.0:
            return FixedPointCharacterization(ORIGIN_ONLY, space)
        return FixedPointCharacterization(ORACLE_ONLY, space)
    if mapd.kind == BALL_PROJ:
        nx = norm(base.x)
        if abs(nx - mapd.radius) <= 1e-12 * max(1.0, mapd.radius):
            return FixedPointCharacterization(ORACLE_ONLY, space)
        if nx < mapd.radius:
            return FixedPointCharacterization(WHOLE_DUAL, space)
        return FixedPointCharacterization(ORIGIN_ONLY, space)
    if mapd.kind == CONE_PROJ:
        if space.kind != KIND_LP or space.p != 2.0:
            return FixedPointCharacterization(ORACLE_ONLY, space)
        m_set = zm_index_set(base.x)
        if m_set is None or not m_set.members:
            return FixedPointCharacterization(ORACLE_ONLY, space)
        return FixedPointCharacterization(
            POSITIVE_CONE_DUAL, space, index_set=m_set.complement
        )
    if mapd.kind == L1_BALL_PROJ:
        nx = norm(base.x)
        if abs(nx - mapd.radius) <= 1e-12 * max(1.0, mapd.radius):
            return FixedPointCharacterization(ORACLE_ONLY, space)
        if not _is_canonical_selection(mapd, base):
            return FixedPointCharacterization(ORACLE_ONLY, space)
        if nx < mapd.radius:
            return FixedPointCharacterization(WHOLE_DUAL, space)
        return FixedPointCharacterization(ORIGIN_ONLY, space)
    return FixedPointCharacterization(ORACLE_ONLY, space)


def expected_coderivative_image(
    mapd: MapDescriptor, base: GraphPoint, ystar: DualVector
) -> DualVector | None:
    """Closed-form image of y* under the derivative operator when it is a
    singleton, used to aim rejection rays."""
    if mapd.kind == AFFINE:
        return mapd.scale * ystar
    if mapd.kind == BALL_PROJ:
        nx = norm(base.x)
        if abs(nx - mapd.radius) <= 1e-12 * max(1.0, mapd.radius):
            return None
        return coderiv_ball_lp(base.x, mapd.radius, ystar).point
    if mapd.kind == L1_BALL_PROJ and norm(base.x) < mapd.radius:
        return ystar
    return None


def registry_rays(
    mapd: MapDescriptor, base: GraphPoint, xstar: DualVector, ystar: DualVector
) -> tuple[PrimalVector, ...]:
    """Rejection rays aimed by the closed forms: the norming direction of
    x* minus its expected image. Safe to add for members, whose ray limits
    are nonpositive."""
    rays: list[PrimalVector] = []
    expected = expected_coderivative_image(mapd, base, ystar)
    if expected is not None:
        diff = xstar - expected
        if dual_norm(diff) > 1e-12 * (1.0 + dual_norm(ystar)):
            rays.append(norming_direction(diff))
    return tuple(rays)


def registry_verdict(query: FixedPointQuery) -> Verdict | None:
    """Exact verdict when a theorem in the registry settles the query,
    otherwise None.

    Beyond the full characterizations this knows the partial cone facts: the
    duality image of a nonnegative base is always a fixed point, and at the
    origin every nonnegative dual is one. The dual origin is a fixed point of
    every operator.
    """
    mapd, base, cand = query.map, query.base, query.candidate
    if dual_norm(cand) == 0.0:
        return Verdict.MEMBER
    char = characterize(mapd, base)
    if char.kind != ORACLE_ONLY:
        return Verdict.MEMBER if char.membership(cand) else Verdict.NON_MEMBER
    if mapd.kind == CONE_PROJ and mapd.space.kind == KIND_LP:
        f = base.x
        if np.all(f.values >= 0.0) and norm(f) > 0.0:
            jf = duality_map(f)
            if dual_norm(cand - jf) <= 1e-12 * (1.0 + dual_norm(jf)):
                return Verdict.MEMBER
        if norm(f) == 0.0 and np.all(cand.values >= 0.0):
            return Verdict.MEMBER
    return None


def is_fixed_point(
    query: FixedPointQuery,
    schedule: SamplingSchedule | None = None,
    mode: str = "registry",
) -> Verdict:
    """Membership of the candidate in its own derivative-operator value.

    mode "registry": closed forms first, oracle as fallback. mode "oracle":
    sampling only (registry still aims rejection rays). mode "audit": run
    both and raise `FixedPointAuditError` on contradiction.
    """
    if mode not in ("registry", "oracle", "audit"):
        raise ValueError(f"unknown mode {mode!r}")
    schedule = schedule or SamplingSchedule()
    exact = registry_verdict(query)
    if mode == "registry" and exact is not None:
        return exact
    _check_quotient_forms(query.map, query.base, query.candidate, schedule)
    rays = registry_rays(query.map, query.base, query.candidate, query.candidate)
    estimate = membership_test(
        query.map, query.base, query.candidate, query.candidate, schedule, rays,
        keep_trace=False,
    )
    if mode == "audit" and exact is not None:
        opposite = {Verdict.MEMBER: Verdict.NON_MEMBER, Verdict.NON_MEMBER: Verdict.MEMBER}
        if estimate.verdict == opposite[exact]:
            raise FixedPointAuditError(
                f"oracle verdict {estimate.verdict.value} contradicts the "
                f"closed form {exact.value} (extrapolated {estimate.extrapolated:.3e})"
            )
        return exact
    return estimate.verdict


def _check_quotient_forms(
    mapd: MapDescriptor, base: GraphPoint, candidate: DualVector, schedule: SamplingSchedule
) -> None:
    """The three equal quotient forms must agree to 1e-12 scale on sampled
    graph points; a violation means the pairing arithmetic broke."""
    rng = np.random.default_rng([schedule.seed, 555])
    dim = mapd.space.size
    radius = schedule.r0 * 2.0 ** (-(schedule.levels - 1))
    scale = 1.0 + dual_norm(candidate)
    for _ in range(8):
        d = rng.standard_normal(dim)
        peak = float(np.max(np.abs(d)))
        if peak == 0.0:
            continue
        u = base.x + (radius / peak) * PrimalVector(mapd.space, d)
        spread = quotient_forms_spread(candidate, base, u, mapd.value(u))
        if spread > 1e-12 * scale:
            raise FixedPointAuditError(
                f"quotient forms disagree by {spread:.3e} at scale {scale:.3e}"
            )


def quotient_forms_spread(
    ystar: DualVector, base: GraphPoint, u: PrimalVector, v: PrimalVector
) -> float:
    """Largest pairwise difference of the three algebraically equal quotient
    forms of the fixed-point criterion at one sample: pairing the increments
    separately, pairing their difference, and pairing the residual shift."""
    den = norm(u - base.x) + norm(v - base.y)
    f1 = (pairing(ystar, u - base.x) - pairing(ystar, v - base.y)) / den
    f2 = pairing(ystar, (u - base.x) - (v - base.y)) / den
    f3 = pairing(ystar, (u - v) - (base.x - base.y)) / den
    return float(max(abs(f1 - f2), abs(f1 - f3), abs(f2 - f3)))


@dataclass(frozen=True)
class ConvexityProbeReport:
    combinations_checked: int
    sequence_checked: int
    violations: tuple[str, ...]


def convexity_closedness_probe(
    mapd: MapDescriptor,
    base: GraphPoint,
    members: tuple[DualVector, ...],
    trials: int = 100,
    schedule: SamplingSchedule | None = None,
    seed: int = 0,
    mode: str = "registry",
) -> ConvexityProbeReport:
    """Convexity and closedness probe of the fixed-point set: convex
    combinations of members at t in {0.25, 0.5, 0.75} must stay members, and
    a geometric interpolation sequence toward a member, together with its
    limit, must stay members."""
    if len(members) < 2:
        raise ValueError("need at least two members to combine")
    rng = np.random.default_rng(seed)
    violations: list[str] = []
    weights = (0.25, 0.5, 0.75)
    combos = 0
    for trial in range(trials):
        i, j = rng.integers(0, len(members), size=2)
        t = weights[trial % len(weights)]
        combo = t * members[int(i)] + (1.0 - t) * members[int(j)]
        verdict = is_fixed_point(FixedPointQuery(mapd, base, combo), schedule, mode=mode)
        combos += 1
        if verdict != Verdict.MEMBER:
            violations.append(f"combination trial {trial}: {verdict.value}")
    return _probe_sequence(mapd, base, members, schedule, mode, combos, violations)


def _probe_sequence(mapd, base, members, schedule, mode, combos, violations):
    target, other = members[0], members[-1]
    seq_checked = 0
    for k in range(1, 7):
        z = target + (2.0**-k) * (other - target)
        verdict = is_fixed_point(FixedPointQuery(mapd, base, z), schedule, mode=mode)
        seq_checked += 1
        if verdict != Verdict.MEMBER:
            violations.append(f"sequence step {k}: {verdict.value}")
    limit_verdict = is_fixed_point(FixedPointQuery(mapd, base, target), schedule, mode=mode)
    seq_checked += 1
    if limit_verdict != Verdict.MEMBER:
        violations.append(f"sequence limit: {limit_verdict.value}")
    return ConvexityProbeReport(
        combinations_checked=combos,
        sequence_checked=seq_checked,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# polynomial projection fixed points
# ---------------------------------------------------------------------------

def poly_annihilator(space: SpaceSpec, degree: int) -> DualVector:
    """An atomic measure annihilating every polynomial of degree <= degree:
    atoms at degree + 2 Chebyshev points, weights spanning the null space of
    the moment matrix, normalized to total variation 1 with a positive first
    weight."""
    pts = chebyshev.chebyshev_points(degree + 2)
    moments = pts[None, :] ** np.arange(degree + 1)[:, None]
    _, _, vt = np.linalg.svd(moments)
    weights = vt[-1]
    if weights[0] < 0:
        weights = -weights
    weights = weights / np.sum(np.abs(weights))
    return atomic_measure(space, tuple(zip(pts.tolist(), weights.tolist())))


def poly_fixed_point_quotient(
    f: PrimalVector,
    degree: int,
    candidate: DualVector,
    schedule: SamplingSchedule | None = None,
    seed: int = 0,
) -> LimsupEstimate:
    """Fixed-point quotient estimate for the polynomial projection at f, with
    perturbation directions drawn from smooth random grid functions plus
    polynomial directions (the projection is continuous, so numerators and
    denominators vanish together along every sampled path)."""
    if f.space.kind != KIND_C01:
        raise ValueError("needs a C01 grid function")
    schedule = schedule or SamplingSchedule(levels=5, dirs_per_level=16, seed=seed)
    mapd = MapDescriptor(POLY_PROJ, f.space, degree=degree)
    grid = f.space.grid
    rng = np.random.default_rng([schedule.seed, 977])
    rays: list[PrimalVector] = [f]
    for k in range(degree + 2):
        rays.append(PrimalVector(f.space, grid**k))
    for _ in range(4):
        vals = np.zeros(grid.size)
        for k in range(1, 6):
            vals += rng.normal() * np.sin(np.pi * k * grid) / k
        rays.append(PrimalVector(f.space, vals))
    sched = SamplingSchedule(
        r0=schedule.r0,
        levels=schedule.levels,
        dirs_per_level=schedule.dirs_per_level,
        extra_rays=tuple(rays),
        seed=schedule.seed,
    )
    base = GraphPoint.at_point(mapd, f)
    return estimate_limsup(mapd, base, candidate, candidate, sched)


@dataclass(frozen=True)
class ScalingDirectionReport:
    """Directed limit along the scaling path g = (1 + lambda) f for the
    polynomial projection, against the predicted value
    <mu, f> / (||f|| + ||p||), plus the exclusions it certifies."""

    limit: float
    predicted: float
    relative_error: float
    candidate_excluded: bool
    fixed_point_excluded: bool | None
    lambdas: tuple[float, ...]
    quotients: tuple[float, ...]


def scaling_direction_report(
    f: PrimalVector,
    degree: int,
    mu: DualVector,
    gamma: DualVector,
    lam0: float = 0.05,
    steps: int = 10,
    ratio: float = 0.5,
) -> ScalingDirectionReport:
    """Certify mu outside the derivative-operator value at gamma (and, when
    mu = gamma annihilates the polynomial class, outside the fixed-point set)
    by the scaling path g = (1 + lambda) f.

    Preconditions: <mu, f> != 0 and gamma annihilates all monomials up to the
    degree. Projections along the path are recomputed by the exchange
    algorithm rather than rescaled, so the limit genuinely tests the
    implementation.
    """
    if f.space.kind != KIND_C01:
        raise ValueError("needs a C01 grid function")
    if abs(pairing(mu, f)) <= 1e-12 * (1.0 + dual_norm(mu)):
        raise ValueError("the scaling path needs <mu, f> != 0")
    grid = f.space.grid
    for k in range(degree + 1):
        if abs(pairing(gamma, PrimalVector(f.space, grid**k))) > 1e-10:
            raise ValueError("gamma must annihilate the polynomial class")
    base_fit = chebyshev.remez(f, degree)
    p_grid = base_fit.polynomial(grid)
    lams = [lam0 * ratio**j for j in range(steps)]
    quotients = []
    for lam in lams:
        g = PrimalVector(f.space, (1.0 + lam) * f.values)
        q_grid = chebyshev.remez(g, degree).polynomial(grid)
        num = pairing(mu, g - f) - _pairing_grid(gamma, q_grid - p_grid, f.space)
        den = float(np.max(np.abs(g.values - f.values)) + np.max(np.abs(q_grid - p_grid)))
        quotients.append(num / den)
    limit = float((quotients[-1] - ratio * quotients[-2]) / (1.0 - ratio))
    predicted = pairing(mu, f) / (norm(f) + float(np.max(np.abs(p_grid))))
    rel_err = abs(limit - predicted) / max(abs(predicted), 1e-300)
    _, tol_reject = tolerance_pair(gamma)
    candidate_excluded = limit >= tol_reject
    fixed_point_excluded: bool | None = None
    if dual_norm(mu - gamma) <= 1e-12 * (1.0 + dual_norm(mu)):
        _, tol_reject_mu = tolerance_pair(mu)
        fixed_point_excluded = limit >= tol_reject_mu
    return ScalingDirectionReport(
        limit=limit,
        predicted=float(predicted),
        relative_error=float(rel_err),
        candidate_excluded=bool(candidate_excluded),
        fixed_point_excluded=fixed_point_excluded,
        lambdas=tuple(lams),
        quotients=tuple(float(q) for q in quotients),
    )


def _pairing_grid(w: DualVector, grid_values: np.ndarray, space: SpaceSpec) -> float:
    return pairing(w, PrimalVector(space, grid_values))


def query_report_json(
    query: FixedPointQuery,
    verdict: Verdict,
    estimate: LimsupEstimate | None = None,
) -> str:
    """One fixed-point query as a JSON record (query data, characterization,
    verdict, and the per-level trace when an oracle estimate is attached)."""
    char = characterize(query.map, query.base)
    record = {
        "map": query.map.kind,
        "base_x": [float(t) for t in query.base.x.values],
        "candidate": (
            [float(t) for t in query.candidate.values]
            if query.candidate.values is not None
            else [[loc, w] for loc, w in query.candidate.atoms]
        ),
        "characterization": char.kind,
        "verdict": verdict.value,
    }
    if estimate is not None:
        record["per_level_sup"] = list(estimate.per_level_sup)
        record["extrapolated"] = estimate.extrapolated
    return json.dumps(record, sort_keys=True)
