"""
Closed-form spectral predictions and their numerical checks.

For mu != 0 the continuous spectrum of U is the arc
{e^{i xi} : cos xi in [V0 - 2 mu, V0 + 2 mu]}, and the only eigenvalues are
+1 / -1 coming from the birth eigenspaces.  This module evaluates those
predictions, compares them with finite-torus eigensolves, and runs the two
resolvent probes that separate the outside-band and inside-band regimes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from .birth import classify_multiplicity
from .errors import DimensionError, EigensolverFailure, ProbeDomainError, ResourceLimit
from .operators import DenseOperator, mu_components, mu_total, potential_v0
from .walk import WalkParameters

__all__ = [
    "SpectralSummary",
    "ProbeReport",
    "Verdict",
    "CoverageMetrics",
    "summarize",
    "arc_from_band",
    "fourier_symbol",
    "torus_spectrum",
    "classify_eigenvalues",
    "band_coverage",
    "resolvent_integral",
    "resolvent_closed_form",
    "divergence_probe",
    "DIVERGENCE_THRESHOLD",
    "PROBE_NODE_CAP",
]

UNIT_TOL = 1e-8
EDGE_TOL = 1e-12
DEFAULT_EXCLUSION = 1e-6
DIVERGENCE_THRESHOLD = 1e4
PROBE_NODE_CAP = 2**24
PROBE_BASE_EXPONENT = 10


@dataclass(frozen=True)
class SpectralSummary:
    """
    Predicted spectrum of U.

    ``arc`` lists closed arcs of the unit circle as ``(start, end)`` angles in
    radians, traversed counter-clockwise; ``point_spectrum`` pairs each of
    +1 and -1 with its multiplicity (0, 1 or ``math.inf``).
    """

    mu_j: tuple[complex, ...]
    mu: float
    V0: float
    band: tuple[float, float]
    arc: tuple[tuple[float, float], ...]
    point_spectrum: tuple[tuple[int, float], ...]

    @property
    def degenerate(self) -> bool:
        return self.mu == 0.0

    @property
    def arc_endpoints(self) -> tuple[float, float]:
        """xi = arccos of the band endpoints (upper endpoint first)."""
        lo, hi = self.band
        upper = 0.0 if hi >= 1.0 - EDGE_TOL else math.acos(_clip(hi))
        lower = math.pi if lo <= -1.0 + EDGE_TOL else math.acos(_clip(lo))
        return upper, lower

    def to_dict(self) -> dict:
        def mult(m: float):
            return "infinity" if m == math.inf else int(m)

        return {
            "mu_j": [[z.real, z.imag] for z in self.mu_j],
            "mu": self.mu,
            "V0": self.V0,
            "band": list(self.band),
            "arc": [list(a) for a in self.arc],
            "arc_endpoints": list(self.arc_endpoints),
            "full_circle": self.arc == ((-math.pi, math.pi),),
            "M_plus": mult(self.point_spectrum[0][1]),
            "M_minus": mult(self.point_spectrum[1][1]),
        }


def _clip(x: float) -> float:
    return min(1.0, max(-1.0, x))


def arc_from_band(lo: float, hi: float) -> tuple[tuple[float, float], ...]:
    """
    Arcs {e^{i xi}: cos xi in [lo, hi]} as CCW angle intervals.

    Band endpoints within 1e-12 of +1 or -1 count as touching it (arccos
    turns 1e-16 rounding in mu into ~1e-8 in angle).
    """
    touches_one = hi >= 1.0 - EDGE_TOL
    touches_minus_one = lo <= -1.0 + EDGE_TOL
    alpha = 0.0 if touches_one else math.acos(_clip(hi))  # nearest to xi = 0
    beta = math.pi if touches_minus_one else math.acos(_clip(lo))  # nearest to xi = pi
    if touches_one and touches_minus_one:
        return ((-math.pi, math.pi),)
    if touches_one:
        return ((-beta, beta),)
    if touches_minus_one:
        return ((alpha, 2 * math.pi - alpha),)
    return ((alpha, beta), (-beta, -alpha))


def summarize(params: WalkParameters) -> SpectralSummary:
    mu_j = mu_components(params)
    mu = mu_total(params)
    v0 = potential_v0(params)
    band = (v0 - 2 * mu, v0 + 2 * mu)
    return SpectralSummary(
        mu_j=tuple(complex(z) for z in mu_j),
        mu=mu,
        V0=v0,
        band=band,
        arc=arc_from_band(*band),
        point_spectrum=((1, classify_multiplicity(params, 1)), (-1, classify_multiplicity(params, -1))),
    )


def fourier_symbol(params: WalkParameters, k: ArrayLike) -> NDArray[np.float64] | float:
    """sum_j 2|mu_j| cos(k_j + arg mu_j) + V0; ``k`` has trailing length n."""
    k = np.asarray(k, dtype=float)
    mu = mu_components(params)
    if k.ndim == 0:
        k = k[None]
    if k.shape[-1] != params.n:
        raise DimensionError(f"k must have trailing dimension n={params.n}")
    val = np.sum(2 * np.abs(mu) * np.cos(k + np.angle(mu)), axis=-1) + potential_v0(params)
    return float(val) if np.ndim(val) == 0 else val


# --------------------------------------------------------------------------
# torus spectra
# --------------------------------------------------------------------------


def torus_spectrum(op: DenseOperator) -> NDArray:
    """
    Full dense eigensolve.

    U-type operators give complex eigenvalues sorted by angle in (-pi, pi];
    T-type operators give sorted real eigenvalues.
    """
    try:
        if op.kind == "T":
            return np.linalg.eigvalsh(op.entries)
        ev = np.linalg.eigvals(op.entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise EigensolverFailure("eigensolver returned non-finite values")
    if op.kind == "U":
        dev = float(np.max(np.abs(np.abs(ev) - 1.0))) if ev.size else 0.0
        if dev > UNIT_TOL:
            raise EigensolverFailure(f"eigenvalues leave the unit circle by {dev:.3g}")
    order = np.lexsort((np.abs(ev), np.angle(ev)))
    return ev[order]


def classify_eigenvalues(
    eigenvalues: ArrayLike,
    band: tuple[float, float],
    *,
    exclusion: float = DEFAULT_EXCLUSION,
    margin: float = 0.0,
) -> list[str]:
    """Label each U-eigenvalue ``plus_one``, ``minus_one``, ``band`` or ``outlier``."""
    ev = np.asarray(eigenvalues)
    lo, hi = band
    labels = []
    for lam in ev:
        if abs(lam - 1) <= exclusion:
            labels.append("plus_one")
        elif abs(lam + 1) <= exclusion:
            labels.append("minus_one")
        elif lo - margin <= _cosine(lam) <= hi + margin:
            labels.append("band")
        else:
            labels.append("outlier")
    return labels


def _cosine(lam) -> float:
    return float(np.cos(np.angle(lam))) if np.iscomplexobj(lam) else float(np.real(lam))


@dataclass(frozen=True)
class CoverageMetrics:
    hausdorff: float
    max_gap: float
    outliers: int
    excluded: int
    inconclusive: bool = False

    def to_dict(self) -> dict:
        return {
            "hausdorff": self.hausdorff,
            "max_gap": self.max_gap,
            "outliers": self.outliers,
            "excluded": self.excluded,
            "inconclusive": self.inconclusive,
        }


def band_coverage(
    eigenvalues: ArrayLike,
    band: tuple[float, float],
    *,
    exclusion: float = DEFAULT_EXCLUSION,
    margin: float = 0.0,
) -> CoverageMetrics:
    """
    Compare a torus spectrum with the predicted band.

    Complex input is read as U-eigenvalues (cos(arg lambda) is compared,
    eigenvalues within ``exclusion`` of +1 or -1 are set aside); real input
    is compared directly.  ``hausdorff`` is the Hausdorff distance between
    the values and the band interval, ``max_gap`` the widest gap between
    consecutive values inside the band, ``outliers`` the number of values
    further than ``margin`` from the band.
    """
    ev = np.asarray(eigenvalues)
    lo, hi = band
    if np.iscomplexobj(ev):
        near = (np.abs(ev - 1) <= exclusion) | (np.abs(ev + 1) <= exclusion)
        values = np.cos(np.angle(ev[~near]))
        excluded = int(np.count_nonzero(near))
    else:
        values = ev.astype(float)
        excluded = 0
    if values.size == 0:
        return CoverageMetrics(math.nan, math.nan, 0, excluded, inconclusive=True)
    values = np.sort(values)
    outside = np.maximum(lo - values, values - hi).clip(min=0.0)
    sup_values = float(np.max(outside))
    # farthest band point from the value set: band endpoints or clamped midpoints
    probes = [lo, hi, *np.clip((values[:-1] + values[1:]) / 2, lo, hi)]
    sup_band = max(float(np.min(np.abs(values - y))) for y in probes)
    inside = values[(values >= lo) & (values <= hi)]
    max_gap = float(np.max(np.diff(inside))) if inside.size > 1 else math.nan
    return CoverageMetrics(
        hausdorff=max(sup_values, sup_band),
        max_gap=max_gap,
        outliers=int(np.count_nonzero(outside > margin)),
        excluded=excluded,
    )


# --------------------------------------------------------------------------
# resolvent probes
# --------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    OUTSIDE_BAND_NONZERO = "OutsideBandNonzero"
    INSIDE_BAND_DIVERGENT = "InsideBandDivergent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ProbeReport:
    lam: float
    integral_value: float
    refinement_values: tuple[float, ...]
    verdict: Verdict
    nodes: tuple[int, ...] = ()
    closed_form: float | None = None
    extra: dict = field(default_factory=dict)

    def rows(self):
        """``(level, nodes, value)`` rows for the probe CSV."""
        if self.refinement_values:
            for level, (m, v) in enumerate(zip(self.nodes, self.refinement_values), start=1):
                yield level, m, v
        else:
            yield 0, self.nodes[0] if self.nodes else 0, self.integral_value

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "integral_value": self.integral_value,
            "refinement_values": list(self.refinement_values),
            "nodes": list(self.nodes),
            "closed_form": self.closed_form,
            "verdict": self.verdict.value,
            **self.extra,
        }


def resolvent_closed_form(params: WalkParameters, lam: float) -> float:
    """2 pi sign(V0 - lam) / sqrt((V0 - lam)^2 - 4 mu^2), for lam outside the closed band."""
    b = potential_v0(params) - lam
    a = 2 * mu_total(params)
    return 2 * math.pi * math.copysign(1.0, b) / math.sqrt(b * b - a * a)


def resolvent_integral(params: WalkParameters, lam: float, *, epsrel: float = 1e-8) -> ProbeReport:
    """
    Integral of 1 / (2 mu cos k + V0 - lam) over [0, 2 pi) for n = 1.

    Adaptive quadrature; the closed form is attached for cross-checking.

    Raises
    ------
    ProbeDomainError
        If ``lam`` lies in the closed band (widened by 1e-12), where the
        integrand is singular.
    """
    if params.n != 1:
        raise DimensionError("resolvent_integral is implemented for n = 1")
    lam = float(lam)
    mu, v0 = mu_total(params), potential_v0(params)
    if v0 - 2 * mu - EDGE_TOL <= lam <= v0 + 2 * mu + EDGE_TOL:
        raise ProbeDomainError(f"lambda = {lam} lies inside the closed band [{v0 - 2 * mu}, {v0 + 2 * mu}]")

    def f(k: float) -> float:
        return 1.0 / (2 * mu * math.cos(k) + v0 - lam)

    value, _, info, *warning = integrate.quad(
        f, 0.0, 2 * math.pi, epsabs=0.0, epsrel=epsrel, limit=200, full_output=True
    )
    grid = 2 * mu * np.cos(np.linspace(0.0, 2 * math.pi, 4097)) + v0 - lam
    same_sign = bool(np.all(grid > 0) or np.all(grid < 0))
    ok = abs(value) > 1e-6 and same_sign and not warning
    verdict = Verdict.OUTSIDE_BAND_NONZERO if ok else Verdict.INCONCLUSIVE
    return ProbeReport(
        lam=lam,
        integral_value=float(value),
        refinement_values=(),
        verdict=verdict,
        nodes=(int(info["neval"]),),
        closed_form=resolvent_closed_form(params, lam),
    )


def _grid_sum(mods: NDArray[np.float64], shift: float, m: int, eta: float) -> float:
    """h^l * sum over the midpoint tensor grid of 1 / ((sum_j 2|nu_j| cos k_j + shift)^2 + eta^2)."""
    h = 2 * math.pi / m
    k = (np.arange(m) + 0.5) * h
    axis_terms = [2 * nu * np.cos(k) for nu in mods]
    head = axis_terms[0]
    if len(axis_terms) == 1:
        f = head + shift
        return float(h * np.sum(1.0 / (f * f + eta * eta)))
    # accumulate over the first axis in fixed order so the result does not depend on chunking
    rest = axis_terms[1:]
    tail = rest[0]
    for extra in rest[1:]:
        tail = np.add.outer(tail, extra)
    tail = tail + shift
    total = 0.0
    for c in head:
        f = tail + c
        total += float(np.sum(1.0 / (f * f + eta * eta)))
    return total * h ** len(mods)


def divergence_probe(params: WalkParameters, lam: float, levels: int = 4) -> ProbeReport:
    """
    Evidence that the squared resolvent is not integrable inside the band.

    Level ``l`` integrates ``1 / |2 sum_j |nu_j| cos k_j + V0 - lam - i eta_l|^2``
    over the axes with nonzero mu_j on a uniform midpoint grid of
    ``2^(10+l)`` nodes per axis.  Tensor grids over several axes are scaled
    down so that the last level stays within 2^24 nodes while every level
    still doubles the per-axis resolution.  The regularization
    ``eta_l = h_l * 2 mu`` is tied to the grid spacing h_l.  As eta_l -> 0
    the values approach the squared-resolvent integral, which is infinite for
    lam in the open band; the probe reports ``InsideBandDivergent`` when the
    level values increase strictly and the last one exceeds 1e4.

    Raises
    ------
    ProbeDomainError
        If mu = 0 or ``lam`` is outside the open band.
    """
    lam = float(lam)
    levels = int(levels)
    if levels < 3:
        raise ValueError("divergence_probe needs at least 3 levels")
    mu, v0 = mu_total(params), potential_v0(params)
    if mu == 0.0 or not (v0 - 2 * mu + EDGE_TOL < lam < v0 + 2 * mu - EDGE_TOL):
        raise ProbeDomainError(f"lambda = {lam} is not inside the open band ({v0 - 2 * mu}, {v0 + 2 * mu})")
    mods = np.abs(mu_components(params))
    mods = mods[mods > 0]
    dims = len(mods)
    cap_exponent = int(math.log2(PROBE_NODE_CAP)) // dims
    offset = min(PROBE_BASE_EXPONENT, cap_exponent - levels)
    if offset < 1:
        raise ResourceLimit(f"{levels} levels over {dims} axes do not fit in {PROBE_NODE_CAP} nodes")
    values, nodes = [], []
    for level in range(1, levels + 1):
        m = 2 ** (offset + level)
        eta = (2 * math.pi / m) * 2 * mu
        values.append(_grid_sum(mods, v0 - lam, m, eta))
        nodes.append(m**dims)
    increasing = all(b > a for a, b in zip(values, values[1:]))
    verdict = (
        Verdict.INSIDE_BAND_DIVERGENT
        if increasing and values[-1] > DIVERGENCE_THRESHOLD
        else Verdict.INCONCLUSIVE
    )
    return ProbeReport(
        lam=lam,
        integral_value=values[-1],
        refinement_values=tuple(values),
        verdict=verdict,
        nodes=tuple(nodes),
    )
