"""
Birth eigenvectors: eigenvectors of U at +1 / -1 that live in
ker(S +- 1) ∩ ker(C + 1) and are invisible to the discriminant.

Sign convention: ``sign=+1`` builds Psi with S Psi = -Psi, C Psi = -Psi,
hence U Psi = +Psi; ``sign=-1`` gives S Psi = +Psi and U Psi = -Psi.

Every such vector is determined by scalar fields psi_1..psi_n through

    Psi_{j,1}(x) = -(q_j / (p_j + sign)) psi_j(x + e_j),   Psi_{j,2}(x) = psi_j(x),

which makes S Psi = -sign Psi automatically; C Psi = -Psi then reduces to
<Phi, Psi(x)> = 0 for x != 0.  Per axis, psi_j is chosen to solve

    conj(Phi_{j,2}) psi_j(x) = (q_j / (p_j + sign)) conj(Phi_{j,1}) psi_j(x + e_j),   x != 0.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import AnchorClash, CaseUnavailable, ResidualTooLarge, WindowMismatch, ZeroVector
from .operators import ScalarField
from .walk import (
    LatticeWindow,
    WalkParameters,
    WaveFunction,
    _translate,
    apply_coin,
    apply_evolution,
    apply_shift,
)

__all__ = [
    "BirthCase",
    "BirthSpec",
    "BirthVector",
    "ZERO_TOL",
    "RATIO_TOL",
    "TAIL_EXPONENT",
    "decay_ratio",
    "classify_case",
    "birth_spec",
    "classify_multiplicity",
    "truncation_radius",
    "construct_psi_component",
    "assemble_birth_vector",
    "birth_vector",
    "normalization_constants",
    "closed_form_profile",
    "finite_support_family",
    "homogeneous_residual",
    "gram_matrix",
    "family_report",
]

ZERO_TOL = 1e-14
RATIO_TOL = 1e-12
# decaying profiles are cut where |r|^R <= 10^-TAIL_EXPONENT, so the dropped mass is <= 1e-24
TAIL_EXPONENT = 12
RESIDUAL_LIMIT = 1e-8


class BirthCase(str, enum.Enum):
    BOTH_ZERO = "BothZero"
    PHI1_ZERO = "Phi1Zero"
    PHI2_ZERO = "Phi2Zero"
    MOD_LESS_ONE = "ModLessOne"
    MOD_GREATER_ONE = "ModGreaterOne"
    MOD_ONE = "ModOne"


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return int(sign)


def _hop(params: WalkParameters, j: int, sign: int) -> complex:
    """q_j / (p_j + sign)."""
    return complex(params.q[j] / (params.p[j] + sign))


def decay_ratio(params: WalkParameters, j: int, sign: int) -> complex | None:
    """r_j = (q_j / (p_j +- 1)) conj(Phi_{j,1}) / conj(Phi_{j,2}); None unless Phi_{j,1} Phi_{j,2} != 0."""
    sign = _check_sign(sign)
    phi1, phi2 = params.phi[j]
    if abs(phi1) <= ZERO_TOL or abs(phi2) <= ZERO_TOL:
        return None
    return _hop(params, j, sign) * np.conj(phi1) / np.conj(phi2)


def classify_case(params: WalkParameters, j: int, sign: int) -> BirthCase:
    phi1, phi2 = params.phi[j]
    z1, z2 = abs(phi1) <= ZERO_TOL, abs(phi2) <= ZERO_TOL
    if z1 and z2:
        return BirthCase.BOTH_ZERO
    if z1:
        return BirthCase.PHI1_ZERO
    if z2:
        return BirthCase.PHI2_ZERO
    mod = abs(decay_ratio(params, j, sign))
    if abs(mod - 1.0) <= RATIO_TOL:
        return BirthCase.MOD_ONE
    return BirthCase.MOD_LESS_ONE if mod < 1.0 else BirthCase.MOD_GREATER_ONE


@dataclass(frozen=True)
class BirthSpec:
    sign: int
    case_per_axis: tuple[BirthCase, ...]
    r_per_axis: tuple[complex | None, ...]
    free_params: tuple[complex | None, ...] = ()


def birth_spec(params: WalkParameters, sign: int, free_params: Sequence[complex | None] = ()) -> BirthSpec:
    sign = _check_sign(sign)
    return BirthSpec(
        sign=sign,
        case_per_axis=tuple(classify_case(params, j, sign) for j in range(params.n)),
        r_per_axis=tuple(decay_ratio(params, j, sign) for j in range(params.n)),
        free_params=tuple(free_params),
    )


def classify_multiplicity(params: WalkParameters, sign: int) -> float:
    """
    Dimension of the birth eigenspace at eigenvalue ``sign``.

    Returns 0, 1 or ``math.inf``.  In one dimension the eigenspace is trivial
    exactly when |q Phi_1| = |(p +- 1) Phi_2| (compared to 1e-12 relative);
    in two or more dimensions it is always infinite.
    """
    sign = _check_sign(sign)
    if params.n >= 2:
        return math.inf
    lhs = abs(params.q[0] * params.phi[0, 0])
    rhs = abs((params.p[0] + sign) * params.phi[0, 1])
    return 0 if abs(lhs - rhs) <= RATIO_TOL * max(lhs, rhs) else 1


def truncation_radius(r: complex) -> int:
    """Smallest R with |r|^-R (growing side) or |r|^R (decaying side) below 1e-12."""
    log_mod = abs(math.log(abs(r)))
    if log_mod == 0.0:
        raise CaseUnavailable("|r| = 1: the profile does not decay")
    return max(1, math.ceil(TAIL_EXPONENT * math.log(10.0) / log_mod))


def _component_extent(params: WalkParameters, j: int, sign: int) -> int:
    case = classify_case(params, j, sign)
    if case in (BirthCase.MOD_LESS_ONE, BirthCase.MOD_GREATER_ONE):
        return truncation_radius(decay_ratio(params, j, sign)) + 1
    return 1


def construct_psi_component(
    params: WalkParameters,
    j: int,
    sign: int,
    seed: complex = 1.0,
    window: LatticeWindow | None = None,
) -> ScalarField:
    """
    Scalar field psi_j for axis ``j`` (0-based) by the per-axis recipe.

    =============== ==========================================================
    case            psi_j
    =============== ==========================================================
    BothZero        seed * delta_0 (any field works)
    Phi1Zero        seed * delta_0
    Phi2Zero        seed * delta_{e_j}
    ModLessOne      r^{-c} * seed at c e_j for c <= 0
    ModGreaterOne   r^{-c+1} * seed at c e_j for c > 0
    =============== ==========================================================

    Geometric tails are cut at the radius from :func:`truncation_radius`.
    The default window is zero-padded with two sites of slack beyond the
    support.

    Raises
    ------
    CaseUnavailable
        For |r_j| = 1, where only the zero field solves the recurrence.
    """
    sign = _check_sign(sign)
    case = classify_case(params, j, sign)
    if case is BirthCase.MOD_ONE:
        raise CaseUnavailable(f"|r_{j + 1}| = 1 for sign {sign:+d}: no square-summable component")
    extent = _component_extent(params, j, sign)
    if window is None:
        window = LatticeWindow.zero_padded(extent + 2, params.n)
    if window.n != params.n:
        raise WindowMismatch("window dimension does not match parameters")
    vals = np.zeros(window.shape, dtype=complex)
    origin = window.origin_index

    def put(c: int, value: complex) -> None:
        site = [0] * params.n
        site[j] = c
        if not window.contains(site):
            raise WindowMismatch(f"window too small for the axis-{j + 1} profile")
        vals[window.index_of(site)] = value

    seed = complex(seed)
    if case in (BirthCase.BOTH_ZERO, BirthCase.PHI1_ZERO):
        vals[origin] = seed
    elif case is BirthCase.PHI2_ZERO:
        put(1, seed)
    else:
        r = decay_ratio(params, j, sign)
        cut = truncation_radius(r)
        if case is BirthCase.MOD_LESS_ONE:
            for c in range(0, -cut - 1, -1):
                put(c, seed * r ** (-c))
        else:
            for c in range(1, cut + 2):
                put(c, seed * r ** (1 - c))
    return ScalarField(window, vals)


@dataclass(frozen=True, eq=False)
class BirthVector:
    """
    Normalized birth eigenvector with its diagnostics.

    ``profile`` holds ||Psi(x)||^2 on ``state.window`` (closed form in one
    dimension, measured otherwise).  ``residual`` is ||U Psi - sign Psi||,
    ``shift_residual`` the sitewise max of |S Psi + sign Psi| and
    ``coin_residual`` the max over x != 0 of |<Phi, Psi(x)>|.
    """

    spec: BirthSpec
    state: WaveFunction
    profile: NDArray[np.float64]
    residual: float
    shift_residual: float
    coin_residual: float
    scale: float = 1.0
    anchor: tuple[int, int] | None = field(default=None)


def _membership(params: WalkParameters, sign: int, state: WaveFunction, *, defect: bool = True) -> tuple[float, float, float]:
    padded = state.padded(1)
    amps = padded.amplitudes
    residual = np.linalg.norm((apply_evolution(params, padded, defect=defect).amplitudes - sign * amps).reshape(-1))
    shift_dev = np.max(np.abs(apply_shift(params, padded).amplitudes + sign * amps))
    coin_dev = np.max(np.abs(apply_coin(params, padded, defect=defect).amplitudes + amps))
    return float(residual), float(shift_dev), float(coin_dev)


def assemble_birth_vector(
    params: WalkParameters,
    sign: int,
    components: Sequence[ScalarField | None],
    *,
    normalize: bool = True,
    check: bool = True,
) -> BirthVector:
    """
    Lift psi_1..psi_n to Psi and verify U Psi = sign * Psi.

    ``None`` entries stand for zero components.  All given fields must share
    one zero-padded window.

    Raises
    ------
    ZeroVector
        If every component vanishes.
    ResidualTooLarge
        If the eigen-residual exceeds 1e-8 (the components violate the recurrence).
    """
    sign = _check_sign(sign)
    if len(components) != params.n:
        raise WindowMismatch(f"need {params.n} components, got {len(components)}")
    windows = {c.window for c in components if c is not None}
    if not windows:
        raise ZeroVector("all birth components are zero")
    if len(windows) > 1:
        raise WindowMismatch("birth components live on different windows")
    window = windows.pop()
    if window.periodic:
        raise WindowMismatch("birth vectors are assembled on zero-padded windows")

    amps = np.zeros((*window.shape, params.n, 2), dtype=complex)
    for j, comp in enumerate(components):
        if comp is None:
            continue
        amps[..., j, 0] = -_hop(params, j, sign) * _translate(comp.values, j - params.n, +1, False)
        amps[..., j, 1] = comp.values
    total = float(np.linalg.norm(amps.reshape(-1)))
    if total == 0.0:
        raise ZeroVector("all birth components are zero")
    scale = total if normalize else 1.0
    state = WaveFunction(window, amps / scale)

    residual, shift_dev = _membership(params, sign, state)[:2]
    chi_overlap = np.abs(np.sum(np.conj(params.phi) * state.amplitudes, axis=(-2, -1)))
    chi_overlap[window.origin_index] = 0.0
    if check and residual > RESIDUAL_LIMIT:
        raise ResidualTooLarge(f"eigen-residual {residual:.3g} exceeds {RESIDUAL_LIMIT}")

    return BirthVector(
        spec=birth_spec(params, sign),
        state=state,
        profile=state.site_norms(),
        residual=residual,
        shift_residual=shift_dev,
        coin_residual=float(np.max(chi_overlap)),
        scale=scale,
    )


def birth_vector(params: WalkParameters, sign: int, seed: complex | None = None) -> BirthVector:
    """
    Default witness of the birth eigenspace.

    In one dimension the recipe component is seeded with the closed-form
    normalization constant, so no rescaling happens (``scale`` ~ 1).  For
    n >= 2 the first axis with an admissible case carries the recipe and the
    others are zero.

    Raises
    ------
    CaseUnavailable
        When the recipe yields only zero fields (multiplicity 0 in 1D).
    """
    sign = _check_sign(sign)
    axis = next((j for j in range(params.n) if classify_case(params, j, sign) is not BirthCase.MOD_ONE), None)
    if axis is None:
        raise CaseUnavailable(f"no axis admits a nonzero birth component for sign {sign:+d}")
    if seed is None:
        seed = next(iter(normalization_constants(params, sign).values())) if params.n == 1 else 1.0
    comps: list[ScalarField | None] = [None] * params.n
    comps[axis] = construct_psi_component(params, axis, sign, seed)
    vec = assemble_birth_vector(params, sign, comps)
    if params.n == 1:
        vec = replace(vec, profile=closed_form_profile(params, sign, vec.state.window.coords(0)))
    return vec


# --------------------------------------------------------------------------
# closed forms for n = 1
# --------------------------------------------------------------------------


def _require_1d(params: WalkParameters, sign: int) -> BirthCase:
    from .errors import DimensionError

    if params.n != 1:
        raise DimensionError("closed forms exist for n = 1 only")
    if classify_multiplicity(params, sign) == 0:
        raise CaseUnavailable(f"M{'+' if sign > 0 else '-'} = 0: no birth eigenvector")
    return classify_case(params, 0, sign)


def normalization_constants(params: WalkParameters, sign: int) -> dict[str, float]:
    """
    Seed that makes the one-dimensional witness a unit vector.

    Returns a single-entry dict keyed by the free constant of the active case:
    ``a`` (Phi_1 = 0), ``b`` (Phi_2 = 0), ``t`` (|r| < 1) or ``u`` (|r| > 1).
    """
    sign = _check_sign(sign)
    case = _require_1d(params, sign)
    p = float(params.p[0])
    hop2 = abs(_hop(params, 0, sign)) ** 2
    a1, a2 = abs(params.phi[0, 0]) ** 2, abs(params.phi[0, 1]) ** 2
    base = 1.0 + hop2
    if case is BirthCase.PHI1_ZERO:
        return {"a": 1.0 / math.sqrt(base)}
    if case is BirthCase.PHI2_ZERO:
        return {"b": 1.0 / math.sqrt(base)}
    if case is BirthCase.MOD_LESS_ONE:
        factor = (1 + sign * p) * a2 / (-(1 - sign * p) * a1 + (1 + sign * p) * a2)
        return {"t": 1.0 / math.sqrt(base * factor)}
    factor = (1 - sign * p) * a1 / ((1 - sign * p) * a1 - (1 + sign * p) * a2)
    return {"u": 1.0 / math.sqrt(base * factor)}


def closed_form_profile(params: WalkParameters, sign: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """
    ||Psi(x)||^2 of the normalized one-dimensional birth vector.

    For |r| < 1 the profile is ``N / (2 |Phi_1|^{2(1-delta(x))} |Phi_2|^2) |r|^{-2x}``
    on x <= 0 with ``N = -|Phi_1|^2 + |Phi_2|^2 + sign p``; for |r| > 1 it is
    ``D / (2 |Phi_1|^2 |Phi_2|^{2(1-delta(x))}) |r|^{-2x}`` on x >= 0 with
    ``D = |Phi_1|^2 - |Phi_2|^2 - sign p``.  The delta-cases are two-site
    profiles with weights (1 -+ p)/2 and (1 +- p)/2.
    """
    sign = _check_sign(sign)
    case = _require_1d(params, sign)
    xs = np.asarray(x)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs).astype(np.int64)
    p = float(params.p[0])
    a1, a2 = abs(params.phi[0, 0]) ** 2, abs(params.phi[0, 1]) ** 2
    out = np.zeros(xs.shape, dtype=float)
    at0 = xs == 0
    if case is BirthCase.PHI1_ZERO:
        out[xs == -1] = (1 - sign * p) / 2
        out[at0] = (1 + sign * p) / 2
    elif case is BirthCase.PHI2_ZERO:
        out[at0] = (1 - sign * p) / 2
        out[xs == 1] = (1 + sign * p) / 2
    else:
        r2 = abs(decay_ratio(params, 0, sign)) ** 2
        if case is BirthCase.MOD_LESS_ONE:
            sel = xs <= 0
            num = -a1 + a2 + sign * p
            denom = 2.0 * np.where(at0, 1.0, a1) * a2
        else:
            sel = xs >= 0
            num = a1 - a2 - sign * p
            denom = 2.0 * a1 * np.where(at0, 1.0, a2)
        vals = num / denom * r2 ** (-xs.astype(float))
        out[sel] = vals[sel]
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# finite-support families for n >= 2
# --------------------------------------------------------------------------


def _anchor_components(params: WalkParameters, sign: int, anchor: tuple[int, int], window: LatticeWindow):
    # Kernel element of the homogeneous constraint: psi_1 = -(c_2 L_2 + d_2) f, psi_2 = (c_1 L_1 + d_1) f,
    # f = delta at the anchor; L_j f is the delta one step *below* the anchor along axis j.
    a, b = anchor
    c = [-_hop(params, j, sign) * np.conj(params.phi[j, 0]) for j in (0, 1)]
    d = [np.conj(params.phi[j, 1]) for j in (0, 1)]
    if all(abs(v) <= ZERO_TOL for v in (c[0], c[1], d[0], d[1])):
        raise AnchorClash(f"anchor {anchor}: every displayed value vanishes")
    rest = [0] * (params.n - 2)
    psi1 = np.zeros(window.shape, dtype=complex)
    psi2 = np.zeros(window.shape, dtype=complex)
    psi1[window.index_of((a, b - 1, *rest))] += -c[1]
    psi1[window.index_of((a, b, *rest))] += -d[1]
    psi2[window.index_of((a - 1, b, *rest))] += c[0]
    psi2[window.index_of((a, b, *rest))] += d[0]
    comps: list[ScalarField | None] = [ScalarField(window, psi1), ScalarField(window, psi2)]
    comps += [None] * (params.n - 2)
    if not (np.any(psi1) or np.any(psi2)):
        raise AnchorClash(f"anchor {anchor}: kernel element is identically zero")
    return comps


def finite_support_family(
    params: WalkParameters,
    sign: int,
    anchors: Sequence[tuple[int, int]],
) -> list[BirthVector]:
    """
    Finitely supported birth eigenvectors, one per anchor (a, b).

    Each one is a translate of the same four-site pattern in the (x_1, x_2)
    plane; it already lies in the birth eigenspace of the homogeneous walk,
    so no tail truncation is involved.
    """
    from .errors import DimensionError

    sign = _check_sign(sign)
    if params.n < 2:
        raise DimensionError("finite-support families need n >= 2")
    out = []
    for anchor in anchors:
        a, b = (int(v) for v in anchor)
        reach = max(abs(a), abs(b)) + 2
        window = LatticeWindow.zero_padded([reach, reach] + [1] * (params.n - 2))
        comps = _anchor_components(params, sign, (a, b), window)
        out.append(replace(assemble_birth_vector(params, sign, comps), anchor=(a, b)))
    return out


def homogeneous_residual(params: WalkParameters, vec: BirthVector) -> float:
    """||U0 Psi - sign Psi|| for the defect-free walk U0 = S C0."""
    return _membership(params, vec.spec.sign, vec.state, defect=False)[0]


def gram_matrix(vectors: Sequence[BirthVector]) -> NDArray[np.complex128]:
    """Gram matrix <v_i, v_j> on a common zero-padded window, fixed pair order."""
    if not vectors:
        return np.zeros((0, 0), dtype=complex)
    n = vectors[0].state.n
    radii = [max(v.state.window.radii[a] for v in vectors) for a in range(n)]
    common = LatticeWindow.zero_padded(radii)
    mat = np.stack([v.state.embed(common).vector() for v in vectors])
    return mat.conj() @ mat.T


def family_report(vectors: Sequence[BirthVector]) -> dict:
    gram = gram_matrix(vectors)
    smallest = float(np.min(np.linalg.eigvalsh(gram))) if len(vectors) else float("nan")
    return {
        "anchors": [list(v.anchor) if v.anchor is not None else None for v in vectors],
        "residuals": [v.residual for v in vectors],
        "gram_smallest_eigenvalue": smallest,
    }
