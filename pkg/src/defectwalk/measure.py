"""
Time-averaged limit measure of the one-defect walk on Z.

The Cesaro average (1/T) sum_{t<T} ||(U^t Psi0)(x)||^2 converges to

    nu(x) = |<Psi+, Psi0>|^2 ||Psi+(x)||^2 + |<Psi-, Psi0>|^2 ||Psi-(x)||^2,

where Psi+/- are the normalized birth eigenvectors (absent ones contribute
nothing).  ``analytic_measure`` evaluates the right-hand side and
``empirical_measure`` the finite-T average by direct simulation.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .birth import birth_vector, classify_multiplicity, closed_form_profile
from .errors import DimensionError, UnnormalizedInitial
from .walk import PARAM_TOL, LatticeWindow, WalkParameters, WaveFunction, evolve

__all__ = [
    "DEFAULT_HORIZON",
    "DEFAULT_SITES",
    "MeasureReport",
    "overlaps",
    "analytic_measure",
    "empirical_measure",
    "compare",
]

DEFAULT_HORIZON = 4000
DEFAULT_SITES = range(-20, 21)


def _check_initial(psi0: WaveFunction) -> None:
    norm = psi0.norm()
    if abs(norm - 1.0) > PARAM_TOL:
        raise UnnormalizedInitial(f"||Psi0|| = {norm:.17g}, expected 1")


def _common_inner(a: WaveFunction, b: WaveFunction) -> complex:
    if a.window.periodic or b.window.periodic:
        raise DimensionError("overlaps are taken on zero-padded windows")
    radii = [max(ra, rb) for ra, rb in zip(a.window.radii, b.window.radii)]
    window = LatticeWindow.zero_padded(radii)
    return a.embed(window).inner(b.embed(window))


def overlaps(params: WalkParameters, psi0: WaveFunction) -> tuple[float, float]:
    """(|<Psi+, Psi0>|^2, |<Psi-, Psi0>|^2), zero where the eigenvector is absent."""
    if params.n != 1:
        raise DimensionError("the limit measure is available for n = 1 only")
    _check_initial(psi0)
    out = []
    for sign in (1, -1):
        if classify_multiplicity(params, sign) == 0:
            out.append(0.0)
        else:
            out.append(abs(_common_inner(birth_vector(params, sign).state, psi0)) ** 2)
    return out[0], out[1]


def analytic_measure(params: WalkParameters, psi0: WaveFunction, sites: Iterable[int] = DEFAULT_SITES) -> dict[int, float]:
    """
    nu(x) for x in ``sites``.

    Raises
    ------
    DimensionError
        If n != 1.
    UnnormalizedInitial
        If ||Psi0|| differs from 1 by more than 1e-12.
    """
    xs = np.asarray(list(sites), dtype=np.int64)
    weights = overlaps(params, psi0)
    nu = np.zeros(xs.shape, dtype=float)
    for sign, w in zip((1, -1), weights):
        if w > 0.0:
            nu += w * closed_form_profile(params, sign, xs)
    return {int(x): float(v) for x, v in zip(xs, nu)}


def _cesaro_field(params: WalkParameters, psi0: WaveFunction, horizon: int, site_budget: int | None):
    acc = None
    window = None
    for t, psi in enumerate(evolve(params, psi0, horizon - 1, site_budget=site_budget)):
        norms = psi.site_norms()
        acc = norms if acc is None else acc + norms
        window = psi.window
    return window, acc / horizon


def empirical_measure(
    params: WalkParameters,
    psi0: WaveFunction,
    horizon: int = DEFAULT_HORIZON,
    sites: Iterable[int] | None = DEFAULT_SITES,
    *,
    site_budget: int | None = None,
) -> dict[tuple[int, ...] | int, float]:
    """
    (1/T) sum_{t<T} ||(U^t Psi0)(x)||^2 by exact light-cone simulation.

    ``sites=None`` returns every site of the light cone (keys are tuples for
    n >= 2, integers in one dimension).  Sites outside the cone get 0.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    _check_initial(psi0)
    window, avg = _cesaro_field(params, psi0, horizon, site_budget)

    def key(site):
        return int(site[0]) if params.n == 1 else tuple(int(v) for v in site)

    if sites is None:
        return {key(s): float(v) for s, v in zip(window.site_array(), avg.reshape(-1))}
    out = {}
    for x in sites:
        site = (x,) if np.ndim(x) == 0 else tuple(x)
        out[key(site)] = float(avg[window.index_of(site)]) if window.contains(site) else 0.0
    return out


@dataclass(frozen=True)
class MeasureReport:
    sites: tuple[int, ...]
    nu_analytic: dict[int, float]
    nu_empirical: dict[int, float]
    overlaps: tuple[float, float]
    horizon: int | None
    sup_error: float
    total_mass_analytic: float

    def rows(self):
        """``(x, nu_analytic, nu_empirical, abs_err)`` rows."""
        for x in self.sites:
            a, e = self.nu_analytic[x], self.nu_empirical[x]
            yield x, a, e, abs(a - e)

    def to_dict(self) -> dict:
        return {
            "sites": [self.sites[0], self.sites[-1]] if self.sites else [],
            "overlaps": list(self.overlaps),
            "horizon": self.horizon,
            "sup_error": self.sup_error,
            "total_mass_analytic": self.total_mass_analytic,
        }


def compare(
    analytic: Mapping[int, float],
    empirical: Mapping[int, float],
    sites: Iterable[int],
    *,
    overlaps: tuple[float, float] = (float("nan"), float("nan")),
    horizon: int | None = None,
) -> MeasureReport:
    """Sup-distance of the two measures on ``sites``; the analytic mass is the overlap sum."""
    xs = tuple(int(x) for x in sites)
    err = max((abs(analytic[x] - empirical[x]) for x in xs), default=0.0)
    return MeasureReport(
        sites=xs,
        nu_analytic={x: analytic[x] for x in xs},
        nu_empirical={x: empirical[x] for x in xs},
        overlaps=overlaps,
        horizon=horizon,
        sup_error=float(err),
        total_mass_analytic=float(sum(overlaps)),
    )
