"""Enrichment analysis: estimate theta for a given b and certify contractivity.

A map T is (b, theta)-enriched when ``||b(x-y) + Tx - Ty, z|| <= theta
||x-y, z||`` for all x, y, z, with b >= 0 and theta in [0, b+1). Averaging T
with lam = 1/(b+1) then yields a plain contraction with factor d = theta * lam
< 1, which is what the solvers drive to a fixed point.

``estimate_theta`` samples the defining ratio and keeps its running maximum.
Two kinds of triples are excluded from the maximum:

* near-dependent triples, where ``||x-y, z||`` falls below the dependence
  threshold ``eps_dep * region scale`` (the quantifier constrains nothing
  there);
* numerically untrusted triples, where a forward error bound on the computed
  ratio exceeds ``ratio_noise_tol``. Evaluating T in doubles perturbs the
  numerator by a few ulps of the coordinate magnitudes, and dividing by a tiny
  denominator amplifies that perturbation far beyond the certification
  tolerances; such samples say nothing about theta. Ratios certifiably above
  ``ratio_cap`` still set ``unbounded_flag``, because their *relative* error
  stays small even where their absolute error bound is large.

Every accepted ratio is therefore within ``ratio_noise_tol`` of the true
ratio of the implemented map, so ``theta_hat`` estimates the supremum from
below up to that tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .mapping import SelfMap, affine_reduction, averaged
from .space import EPS, SpaceElement, TwoNormSpace, WitnessSet, two_norm_batch

__all__ = [
    "NotCertifiableError",
    "Provenance",
    "EnrichedCertificate",
    "ThetaEstimate",
    "ContractionCheck",
    "SamplingBox",
    "DEFAULT_B_GRID",
    "theta_scalar_affine",
    "certify",
    "certify_sampled",
    "estimate_theta",
    "optimize_b",
    "verify_averaged_contraction",
]


class NotCertifiableError(Exception):
    """The pair (b, theta) violates the definitional range theta < b + 1."""


@dataclass(frozen=True)
class Provenance:
    """Where a certificate's theta came from."""

    kind: str  # closed_form | sampled | asserted
    sample_count: Optional[int] = None
    seed: Optional[int] = None

    @classmethod
    def closed_form(cls) -> "Provenance":
        return cls("closed_form")

    @classmethod
    def sampled(cls, sample_count: int, seed: int) -> "Provenance":
        return cls("sampled", sample_count, seed)

    @classmethod
    def asserted(cls) -> "Provenance":
        return cls("asserted")

    def __str__(self) -> str:
        if self.kind == "sampled":
            return f"sampled(count={self.sample_count},seed={self.seed})"
        return self.kind


@dataclass(frozen=True)
class EnrichedCertificate:
    """The tuple (b, theta, lambda, d) certifying enriched contractivity.

    lambda = 1/(b+1) and d = theta * lambda exactly as computed, so d < 1 is
    equivalent to theta < b + 1.
    """

    b: float
    theta: float
    lam: float
    d: float
    provenance: Provenance

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b >= 0.0):
            raise ValueError(f"b must be finite and nonnegative, got {self.b}")
        if not (math.isfinite(self.theta) and self.theta >= 0.0):
            raise ValueError(f"theta must be finite and nonnegative, got {self.theta}")
        if self.theta >= self.b + 1.0:
            raise NotCertifiableError(
                f"theta={self.theta} is not below b+1={self.b + 1.0}"
            )
        if self.lam != 1.0 / (self.b + 1.0):
            raise ValueError("lambda must equal 1/(b+1) exactly as computed")
        if self.d != self.theta * self.lam:
            raise ValueError("d must equal theta*lambda exactly as computed")


def certify(b: float, theta: float, provenance: Provenance) -> EnrichedCertificate:
    """Build the certificate for a (b, theta) pair, or refuse it.

    Raises :class:`NotCertifiableError` when theta >= b + 1, the boundary
    excluded by the enrichment definition.
    """
    b = float(b)
    theta = float(theta)
    lam = 1.0 / (b + 1.0)
    return EnrichedCertificate(b=b, theta=theta, lam=lam, d=theta * lam, provenance=provenance)


def theta_scalar_affine(c: float, b: float) -> float:
    """Exact minimal theta for x -> c*x + t under any 2-norm: |b + c|.

    The enriched difference for such a map is (b + c)(x - y), so absolute
    homogeneity makes every admissible ratio equal |b + c|.
    """
    if b < 0:
        raise ValueError(f"b must be nonnegative, got {b}")
    return abs(b + c)


@dataclass(frozen=True)
class SamplingBox:
    """An axis-aligned box from which analysis triples are drawn."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be matching nonempty tuples")
        if any(not (math.isfinite(a) and math.isfinite(b)) or a > b for a, b in zip(lo, hi)):
            raise ValueError(f"invalid box bounds lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def symmetric(cls, dimension: int, half_width: float = 10.0) -> "SamplingBox":
        return cls(tuple(-half_width for _ in range(dimension)),
                   tuple(half_width for _ in range(dimension)))

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def scale(self) -> float:
        return max(max(abs(v) for v in self.lo), max(abs(v) for v in self.hi), 1.0)


@dataclass(frozen=True)
class ThetaEstimate:
    """Sampled lower estimate of the enrichment coefficient at a given b."""

    b: float
    theta_hat: float
    argmax_triple: Optional[tuple[SpaceElement, SpaceElement, SpaceElement]]
    skipped_dependent: int
    skipped_noisy: int
    accepted: int
    unbounded_flag: bool
    sample_count: int
    seed: int


def _draw_triples(region: SamplingBox, witnesses: Optional[WitnessSet],
                  count: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # One block of draws per sample keeps the stream prefix-stable in count,
    # which makes theta_hat monotone under sample-count extension.
    rng = np.random.default_rng(seed)
    lo = np.array(region.lo)
    hi = np.array(region.hi)
    pts = rng.uniform(lo, hi, size=(count, 3, region.dimension))
    X = pts[:, 0, :].copy()
    Y = pts[:, 1, :].copy()
    Z = pts[:, 2, :].copy()
    if witnesses is not None:
        # The quantifier also ranges over the residual directions the solver
        # will measure against, so the first samples pin z to the witnesses.
        for i, w in enumerate(witnesses.witnesses[: min(len(witnesses.witnesses), count)]):
            Z[i] = w.coords
    return X, Y, Z


def _row_norm(a: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a, axis=1)


_NOISE_NUM = 8.0
_NOISE_DEN = 4.0


def estimate_theta(
    T: SelfMap,
    b: float,
    space: TwoNormSpace,
    region: SamplingBox,
    witnesses: Optional[WitnessSet],
    count: int,
    seed: int,
    eps_dep: float = 1e-8,
    ratio_noise_tol: float = 1e-12,
    ratio_cap: float = 1e6,
) -> ThetaEstimate:
    """Sampled supremum of ||b(x-y) + Tx - Ty, z|| / ||x-y, z|| over the box.

    Deterministic given the seed; the maximum is taken over triples that pass
    the dependence and noise guards described in the module docstring, and the
    maximising triple is the lowest-index one.
    """
    if b < 0:
        raise ValueError(f"b must be nonnegative, got {b}")
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if eps_dep <= 0:
        raise ValueError(f"eps_dep must be positive, got {eps_dep}")

    X, Y, Z = _draw_triples(region, witnesses, count, seed)
    TX = T.apply_batch(X)
    TY = T.apply_batch(Y)
    D = X - Y
    V = b * D + (TX - TY)

    den = two_norm_batch(space, D, Z)
    num = two_norm_batch(space, V, Z)

    dep = den <= eps_dep * region.scale
    live = ~dep

    ratio = np.divide(num, den, out=np.zeros_like(num), where=live)

    # Forward error model: T evaluated in doubles perturbs each coordinate of
    # the numerator vector by ~EPS times the magnitudes that entered it, and
    # ||e, z|| <= |e| |z| bounds how that reaches the area.
    zmag = _row_norm(Z)
    coord_mag = abs(b) * (np.abs(X) + np.abs(Y)) + np.abs(TX) + np.abs(TY) + np.abs(V)
    err_num = EPS * (_NOISE_NUM * _row_norm(coord_mag) * zmag + 4.0 * num)
    err_den = EPS * (_NOISE_DEN * _row_norm(np.abs(D)) * zmag + 4.0 * den)
    err_ratio = np.divide(err_num + ratio * err_den, den,
                          out=np.full_like(num, np.inf), where=live)

    accepted = live & (err_ratio <= ratio_noise_tol)
    unbounded = bool(np.any(live & (ratio - err_ratio > ratio_cap)))
    n_dep = int(np.count_nonzero(dep))
    n_noisy = int(np.count_nonzero(live & ~accepted))
    n_acc = int(np.count_nonzero(accepted))

    if n_acc == 0:
        theta_hat, triple = 0.0, None
    else:
        masked = np.where(accepted, ratio, -np.inf)
        idx = int(np.argmax(masked))  # argmax returns the lowest tied index
        theta_hat = float(ratio[idx])
        triple = (
            SpaceElement(tuple(X[idx])),
            SpaceElement(tuple(Y[idx])),
            SpaceElement(tuple(Z[idx])),
        )

    return ThetaEstimate(
        b=float(b),
        theta_hat=theta_hat,
        argmax_triple=triple,
        skipped_dependent=n_dep,
        skipped_noisy=n_noisy,
        accepted=n_acc,
        unbounded_flag=unbounded,
        sample_count=count,
        seed=seed,
    )


_INFLATION = 1.01


def certify_sampled(
    b: float, estimate: ThetaEstimate, inflation: float = _INFLATION
) -> EnrichedCertificate:
    """Certify from a sampled estimate, inflating theta_hat for margin.

    Sampling estimates the supremum from below, so theta_hat is inflated by
    ``inflation`` (capped midway below b+1) before certification; unbounded or
    empty estimates are refused outright.
    """
    if estimate.unbounded_flag:
        raise NotCertifiableError(
            f"sampled ratios at b={b} exceed the cap; the supremum looks unbounded"
        )
    if estimate.accepted == 0:
        raise NotCertifiableError(f"no trustworthy samples at b={b}")
    if estimate.theta_hat >= b + 1.0:
        raise NotCertifiableError(
            f"sampled theta_hat={estimate.theta_hat} is not below b+1={b + 1.0}"
        )
    theta = min(inflation * estimate.theta_hat, 0.5 * (estimate.theta_hat + b + 1.0))
    return certify(b, theta, Provenance.sampled(estimate.sample_count, estimate.seed))


DEFAULT_B_GRID: tuple[float, ...] = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_b(
    T: SelfMap,
    space: TwoNormSpace,
    region: SamplingBox,
    witnesses: Optional[WitnessSet],
    grid: Sequence[float] = DEFAULT_B_GRID,
    refine_steps: int = 32,
    count: int = 100_000,
    seed: int = 0,
    eps_dep: float = 1e-8,
    allow_closed_form: bool = True,
) -> tuple[float, EnrichedCertificate]:
    """Search for the b minimising the averaged contraction factor d(b).

    Evaluates ``d_hat(b) = theta(b)/(b+1)`` on the grid, using the closed form
    |b + c| when the map tree reduces to x -> c*x + t and the sampled estimate
    otherwise, then golden-section refines inside the bracket around the grid
    minimiser. d(b) is unimodal for affine maps; for sampled maps this is a
    heuristic. Ties go to the smaller b (larger averaging step). Candidates
    whose sampled ratios look unbounded are discarded.
    """
    grid = sorted(set(float(g) for g in grid))
    if not grid or any(g < 0 for g in grid):
        raise ValueError("grid must be a nonempty collection of b >= 0")

    closed = affine_reduction(T) if allow_closed_form else None
    cache: dict[float, ThetaEstimate] = {}

    def theta_at(b: float) -> float:
        if closed is not None:
            return theta_scalar_affine(closed[0], b)
        est = cache.get(b)
        if est is None:
            est = estimate_theta(T, b, space, region, witnesses, count, seed, eps_dep)
            cache[b] = est
        if est.unbounded_flag or est.accepted == 0:
            return math.inf
        return est.theta_hat

    def d_at(b: float) -> float:
        th = theta_at(b)
        return th / (b + 1.0) if math.isfinite(th) else math.inf

    best_b = grid[0]
    best_d = d_at(best_b)
    best_i = 0
    for i, g in enumerate(grid[1:], start=1):
        dg = d_at(g)
        if dg < best_d:  # strict: ties stay with the smaller b
            best_b, best_d, best_i = g, dg, i

    if not math.isfinite(best_d) or best_d >= 1.0:
        raise NotCertifiableError(
            "no grid point certifies: theta_hat(b) >= b+1 throughout the grid"
        )

    lo = grid[best_i - 1] if best_i > 0 else grid[best_i]
    hi = grid[best_i + 1] if best_i + 1 < len(grid) else grid[best_i]
    if hi > lo:
        c = hi - _GOLDEN * (hi - lo)
        d_pt = lo + _GOLDEN * (hi - lo)
        fc, fd = d_at(c), d_at(d_pt)
        for _ in range(refine_steps):
            for b_cand, val in ((c, fc), (d_pt, fd)):
                if val < best_d or (val == best_d and b_cand < best_b):
                    best_b, best_d = b_cand, val
            if fc < fd:
                hi, d_pt, fd = d_pt, c, fc
                c = hi - _GOLDEN * (hi - lo)
                fc = d_at(c)
            else:
                lo, c, fc = c, d_pt, fd
                d_pt = lo + _GOLDEN * (hi - lo)
                fd = d_at(d_pt)

    if closed is not None:
        cert = certify(best_b, theta_scalar_affine(closed[0], best_b), Provenance.closed_form())
    else:
        cert = certify_sampled(best_b, cache[best_b])
    return best_b, cert


@dataclass(frozen=True)
class ContractionCheck:
    """Outcome of sampling the averaged map against its certified factor."""

    passed: bool
    worst_ratio: float
    checked: int
    skipped: int


def verify_averaged_contraction(
    cert: EnrichedCertificate,
    T: SelfMap,
    space: TwoNormSpace,
    region: SamplingBox,
    count: int,
    seed: int,
    eps_dep: float = 1e-8,
    slack: float = 1e-9,
) -> ContractionCheck:
    """Sample ``||T_lam x - T_lam y, z|| / ||x - y, z||`` against d + slack."""
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    Tl = averaged(T, cert.lam)
    X, Y, Z = _draw_triples(region, None, count, seed)
    AX = Tl.apply_batch(X)
    AY = Tl.apply_batch(Y)
    D = X - Y
    V = AX - AY

    den = two_norm_batch(space, D, Z)
    num = two_norm_batch(space, V, Z)
    live = den > eps_dep * region.scale
    ratio = np.divide(num, den, out=np.zeros_like(num), where=live)

    zmag = _row_norm(Z)
    coord_mag = np.abs(AX) + np.abs(AY) + np.abs(V)
    err_num = EPS * (_NOISE_NUM * _row_norm(coord_mag) * zmag + 4.0 * num)
    err_den = EPS * (_NOISE_DEN * _row_norm(np.abs(D)) * zmag + 4.0 * den)
    err_ratio = np.divide(err_num + ratio * err_den, den,
                          out=np.full_like(num, np.inf), where=live)
    accepted = live & (err_ratio <= 1e-12)

    checked = int(np.count_nonzero(accepted))
    worst = float(np.max(np.where(accepted, ratio, -np.inf))) if checked else 0.0
    return ContractionCheck(
        passed=worst <= cert.d + slack,
        worst_ratio=worst,
        checked=checked,
        skipped=int(count - checked),
    )
