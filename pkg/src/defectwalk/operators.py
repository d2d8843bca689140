"""
Operators behind the spectral mapping theorem for the one-defect walk.

Scalar fields on Z^n (the space K~) and on Z^n minus the origin (the space K)
share one storage type, :class:`ScalarField`; a K-field is flagged
``punctured`` and always stores 0 at the origin.

    d~ : H -> K~,   (d~ Psi)(x) = <chi(x), Psi(x)>
    d~*: K~ -> H,   (d~* psi)(x) = chi(x) psi(x)
    iota: K -> K~   (extension by zero),  iota*: K~ -> K  (restriction)
    d = iota* d~,   T = d S d*,   T~ = d~ S d~*
    T~0 = sum_j (mu_j L_j + conj(mu_j) L_j^*) + V0,   T = iota* T~0 iota
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ResourceLimit, WindowMismatch
from .walk import (
    LatticeWindow,
    WalkParameters,
    WaveFunction,
    WindowKind,
    _coin_kernel,
    _shift_kernel,
    _translate,
    chi_field,
)

__all__ = [
    "DEFAULT_DENSE_BUDGET",
    "ScalarField",
    "DenseOperator",
    "mu_components",
    "mu_total",
    "potential_v0",
    "apply_dtilde",
    "apply_dtilde_adjoint",
    "iota",
    "iota_adjoint",
    "apply_d",
    "apply_d_adjoint",
    "coin_identity_check",
    "apply_T0tilde",
    "apply_Ttilde",
    "apply_T",
    "build_dense_U",
    "build_dense_T",
]

DEFAULT_DENSE_BUDGET = 6000


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One complex amplitude per site; ``values`` has shape ``window.shape``."""

    window: LatticeWindow
    values: NDArray[np.complex128]
    punctured: bool = False

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.window.shape:
            raise WindowMismatch(f"values have shape {vals.shape}, window expects {self.window.shape}")
        if self.punctured and vals[self.window.origin_index] != 0:
            vals = vals.copy()
            vals[self.window.origin_index] = 0
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, window: LatticeWindow, *, punctured: bool = False) -> ScalarField:
        return cls(window, np.zeros(window.shape, dtype=complex), punctured)

    @classmethod
    def delta(cls, window: LatticeWindow, site: Sequence[int], value: complex = 1.0, *, punctured: bool = False) -> ScalarField:
        vals = np.zeros(window.shape, dtype=complex)
        vals[window.index_of(site)] = value
        return cls(window, vals, punctured)

    @property
    def n(self) -> int:
        return self.window.n

    def at(self, site: Sequence[int]) -> complex:
        if not self.window.contains(site):
            return 0j
        return complex(self.values[self.window.index_of(site)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.values.reshape(-1)))

    def inner(self, other: ScalarField) -> complex:
        if other.window != self.window:
            raise WindowMismatch("inner product needs fields on the same window")
        return complex(np.vdot(self.values, other.values))


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """
    Dense matrix of an operator on a finite torus.

    ``basis`` describes the enumeration: sites lexicographic (origin dropped
    for K-operators), then components (j, k) for operators on H.
    """

    dimension: int
    entries: NDArray[np.complex128]
    basis: str
    window: LatticeWindow
    kind: str = "U"
    sites: NDArray[np.int64] = field(default=None, repr=False)

    def unitarity_deviation(self) -> float:
        a = self.entries
        return float(np.max(np.abs(a.conj().T @ a - np.eye(self.dimension))))

    def hermiticity_deviation(self) -> float:
        a = self.entries
        return float(np.max(np.abs(a - a.conj().T))) if self.dimension else 0.0

    def csv_rows(self):
        """Nonzero entries as ``(row, col, re, im)``."""
        rows, cols = np.nonzero(self.entries)
        for r, c in zip(rows, cols):
            z = self.entries[r, c]
            yield int(r), int(c), z.real, z.imag


# --------------------------------------------------------------------------
# scalars of the model
# --------------------------------------------------------------------------


def mu_components(params: WalkParameters) -> NDArray[np.complex128]:
    """mu_j = q_j conj(Phi_{j,1}) Phi_{j,2}."""
    return params.q * np.conj(params.phi[:, 0]) * params.phi[:, 1]


def mu_total(params: WalkParameters) -> float:
    return float(np.sum(np.abs(mu_components(params))))


def potential_v0(params: WalkParameters) -> float:
    """V0 = sum_j p_j (|Phi_{j,1}|^2 - |Phi_{j,2}|^2)."""
    return float(np.sum(params.p * (np.abs(params.phi[:, 0]) ** 2 - np.abs(params.phi[:, 1]) ** 2)))


# --------------------------------------------------------------------------
# d~, d, iota
# --------------------------------------------------------------------------


def _check_field(params: WalkParameters, f: ScalarField | WaveFunction) -> None:
    if f.window.n != params.n:
        raise WindowMismatch(f"window has dimension {f.window.n}, parameters have n={params.n}")


def apply_dtilde(params: WalkParameters, psi: WaveFunction) -> ScalarField:
    _check_field(params, psi)
    chi = chi_field(params, psi.window)
    return ScalarField(psi.window, np.sum(np.conj(chi) * psi.amplitudes, axis=(-2, -1)))


def apply_dtilde_adjoint(params: WalkParameters, f: ScalarField) -> WaveFunction:
    _check_field(params, f)
    chi = chi_field(params, f.window)
    return WaveFunction(f.window, chi * f.values[..., None, None])


def iota(f: ScalarField) -> ScalarField:
    """Extension by zero, K -> K~."""
    vals = f.values.copy()
    vals[f.window.origin_index] = 0
    return ScalarField(f.window, vals, punctured=False)


def iota_adjoint(f: ScalarField) -> ScalarField:
    """Restriction to Z^n minus the origin, K~ -> K."""
    return ScalarField(f.window, f.values, punctured=True)


def apply_d(params: WalkParameters, psi: WaveFunction) -> ScalarField:
    return iota_adjoint(apply_dtilde(params, psi))


def apply_d_adjoint(params: WalkParameters, f: ScalarField) -> WaveFunction:
    return apply_dtilde_adjoint(params, iota(f))


def coin_identity_check(params: WalkParameters, psi: WaveFunction) -> float:
    """
    Largest sitewise deviation between C psi and both ``(2 d~* d~ - 1) psi``
    and ``(2 d* d - 1) psi``.
    """
    _check_field(params, psi)
    coin = _coin_kernel(chi_field(params, psi.window), psi.amplitudes)
    via_dtilde = 2.0 * apply_dtilde_adjoint(params, apply_dtilde(params, psi)).amplitudes - psi.amplitudes
    via_d = 2.0 * apply_d_adjoint(params, apply_d(params, psi)).amplitudes - psi.amplitudes
    dev = np.maximum(
        np.sqrt(np.sum(np.abs(via_dtilde - coin) ** 2, axis=(-2, -1))),
        np.sqrt(np.sum(np.abs(via_d - coin) ** 2, axis=(-2, -1))),
    )
    return float(np.max(dev)) if dev.size else 0.0


# --------------------------------------------------------------------------
# discriminants
# --------------------------------------------------------------------------


def _t0_kernel(params: WalkParameters, vals: np.ndarray, periodic: bool) -> np.ndarray:
    n = params.n
    mu = mu_components(params)
    out = potential_v0(params) * vals
    for j in range(n):
        if mu[j] == 0:
            continue
        ax = j - n
        out = out + mu[j] * _translate(vals, ax, +1, periodic) + np.conj(mu[j]) * _translate(vals, ax, -1, periodic)
    return out


def apply_T0tilde(params: WalkParameters, f: ScalarField) -> ScalarField:
    """Translation-invariant discriminant: mu_j hops to x+e_j, conj(mu_j) hops to x-e_j, plus V0."""
    _check_field(params, f)
    return ScalarField(f.window, _t0_kernel(params, f.values, f.window.periodic))


def apply_Ttilde(params: WalkParameters, f: ScalarField) -> ScalarField:
    """Defect-aware discriminant ``d~ S d~*``; every hop touching the origin is cut."""
    _check_field(params, f)
    lifted = apply_dtilde_adjoint(params, f)
    shifted = WaveFunction(f.window, _shift_kernel(params, lifted.amplitudes, f.window.periodic))
    return apply_dtilde(params, shifted)


def _t_kernel(params: WalkParameters, vals: np.ndarray, window: LatticeWindow) -> np.ndarray:
    vals = vals.copy()
    vals[(..., *window.origin_index)] = 0
    out = _t0_kernel(params, vals, window.periodic)
    out[(..., *window.origin_index)] = 0
    return out


def apply_T(params: WalkParameters, f: ScalarField) -> ScalarField:
    """T = iota* T~0 iota on K; the origin entry of input and output is 0."""
    _check_field(params, f)
    return ScalarField(f.window, _t_kernel(params, f.values, f.window), punctured=True)


# --------------------------------------------------------------------------
# dense torus matrices
# --------------------------------------------------------------------------


def _torus(params: WalkParameters, period: int) -> LatticeWindow:
    period = int(period)
    if period < 3:
        raise ValueError(f"torus period must be at least 3, got {period}")
    return LatticeWindow(WindowKind.PERIODIC_TORUS, (period,) * params.n)


def build_dense_U(params: WalkParameters, period: int, *, budget: int | None = None) -> DenseOperator:
    """
    Matrix of U = SC on the n-torus of period ``period`` with the defect at 0.

    Columns are images of the canonical basis vectors, assembled in one
    batched matrix-free application.
    """
    window = _torus(params, period)
    dim = 2 * params.n * window.num_sites
    limit = DEFAULT_DENSE_BUDGET if budget is None else budget
    if dim > limit:
        raise ResourceLimit(f"dense U of dimension {dim} exceeds the budget {limit}")
    basis = np.eye(dim, dtype=complex).reshape(dim, *window.shape, params.n, 2)
    chi = chi_field(params, window)
    images = _shift_kernel(params, _coin_kernel(chi, basis), True)
    return DenseOperator(
        dimension=dim,
        entries=np.ascontiguousarray(images.reshape(dim, dim).T),
        basis="torus sites lexicographic, then components (j, k)",
        window=window,
        kind="U",
        sites=window.site_array(),
    )


def build_dense_T(params: WalkParameters, period: int, *, budget: int | None = None) -> DenseOperator:
    """Matrix of T on the torus with the origin removed (dimension N^n - 1)."""
    window = _torus(params, period)
    dim = window.num_sites - 1
    limit = DEFAULT_DENSE_BUDGET if budget is None else budget
    if dim > limit:
        raise ResourceLimit(f"dense T of dimension {dim} exceeds the budget {limit}")
    origin_flat = int(np.ravel_multi_index(window.origin_index, window.shape))
    keep = np.delete(np.arange(window.num_sites), origin_flat)
    basis = np.zeros((dim, window.num_sites), dtype=complex)
    basis[np.arange(dim), keep] = 1.0
    images = _t_kernel(params, basis.reshape(dim, *window.shape), window).reshape(dim, -1)[:, keep]
    return DenseOperator(
        dimension=dim,
        entries=np.ascontiguousarray(images.T),
        basis="torus sites lexicographic, origin removed",
        window=window,
        kind="T",
        sites=window.site_array()[keep],
    )
