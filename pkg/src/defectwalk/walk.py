"""
Split-step quantum walk on Z^n with a single coin defect at the origin.

States live in l^2(Z^n; C^{2n}) and are stored on finite lattice windows as
complex arrays of shape ``(*window.shape, n, 2)``; the last two axes are the
component index (j, k) with j the lattice axis and k in {1, 2}.  Flattening
such an array in C order gives the canonical basis ordering used everywhere
in the package: sites lexicographic in (x_1, ..., x_n), then (j, k).

The shift acts axis by axis,

    (S_j psi)(x) = (p_j psi_1(x) + q_j psi_2(x + e_j),
                    conj(q_j) psi_1(x - e_j) - p_j psi_2(x)),

and the coin is the sitewise reflection C(x) = 2|chi(x)><chi(x)| - 1 with
chi(x) = Phi away from the origin and chi(0) = 0, so C(0) = -1.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DegenerateShift,
    ParameterError,
    ResourceLimit,
    UnitarityViolation,
    UnnormalizedChi,
    WindowMismatch,
)

__all__ = [
    "PARAM_TOL",
    "DEFAULT_SITE_BUDGET",
    "WalkParameters",
    "WindowKind",
    "LatticeWindow",
    "WaveFunction",
    "validate_params",
    "params_from_dict",
    "chi_field",
    "apply_shift",
    "apply_coin",
    "apply_evolution",
    "evolve",
]

PARAM_TOL = 1e-12
DEFAULT_SITE_BUDGET = 20_000_000


# --------------------------------------------------------------------------
# parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WalkParameters:
    """
    Validated model instance (n, p, q, Phi).

    Use :func:`validate_params` to build one; the constructor performs the
    same checks and never renormalizes its inputs.

    Attributes
    ----------
    n : int
        Lattice dimension.
    p : ndarray of float, shape (n,)
    q : ndarray of complex, shape (n,)
    phi : ndarray of complex, shape (n, 2)
        ``phi[j] = (Phi_{j,1}, Phi_{j,2})``.
    """

    n: int
    p: NDArray[np.float64]
    q: NDArray[np.complex128]
    phi: NDArray[np.complex128]

    def __post_init__(self) -> None:
        n = self.n
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise ParameterError(f"n must be a positive integer, got {n!r}")
        p = np.array(self.p, dtype=float).reshape(-1)
        q = np.array(self.q, dtype=complex).reshape(-1)
        phi = np.array(self.phi, dtype=complex)
        if p.shape != (n,) or q.shape != (n,):
            raise ParameterError(f"p and q must have length n={n}")
        if phi.shape != (n, 2):
            raise ParameterError(f"phi must hold n={n} pairs, got shape {phi.shape}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q)) and np.all(np.isfinite(phi))):
            raise ParameterError("parameters must be finite")

        dev = np.abs(p**2 + np.abs(q) ** 2 - 1.0)
        if np.any(dev > PARAM_TOL):
            j = int(np.argmax(dev))
            raise UnitarityViolation(
                f"p_{j + 1}^2 + |q_{j + 1}|^2 = {1.0 + dev[j]:.17g} deviates from 1 by {dev[j]:.3g}"
            )
        if np.any(np.abs(p) >= 1.0 - PARAM_TOL):
            j = int(np.argmax(np.abs(p)))
            raise DegenerateShift(f"|p_{j + 1}| = {abs(p[j])} is not below 1; the e_{j + 1}-shift never happens")
        norm2 = float(np.sum(np.abs(phi) ** 2))
        if abs(norm2 - 1.0) > PARAM_TOL:
            raise UnnormalizedChi(f"||Phi||^2 = {norm2:.17g} is not 1")

        for arr in (p, q, phi):
            arr.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "phi", phi)

    @property
    def phi_flat(self) -> NDArray[np.complex128]:
        """Phi as a length-2n vector in (j, k) order."""
        return self.phi.reshape(-1)

    def to_dict(self) -> dict:
        """JSON-ready form; complex numbers as ``[re, im]``."""
        return {
            "n": self.n,
            "p": [float(v) for v in self.p],
            "q": [_cpair(v) for v in self.q],
            "phi": [[_cpair(a), _cpair(b)] for a, b in self.phi],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WalkParameters):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.q, other.q)
            and np.array_equal(self.phi, other.phi)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.p.tobytes(), self.q.tobytes(), self.phi.tobytes()))

    def __repr__(self) -> str:
        return f"WalkParameters(n={self.n}, p={self.p.tolist()}, q={self.q.tolist()}, phi={self.phi.tolist()})"


def _cpair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def validate_params(p: ArrayLike, q: ArrayLike, phi: ArrayLike, n: int | None = None) -> WalkParameters:
    """
    Check candidate parameters and return a :class:`WalkParameters`.

    Raises
    ------
    UnitarityViolation
        ``p_j^2 + |q_j|^2`` differs from 1 by more than 1e-12.
    DegenerateShift
        ``|p_j| >= 1 - 1e-12``.
    UnnormalizedChi
        ``||Phi||^2`` differs from 1 by more than 1e-12.
    """
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    if n is None:
        n = int(p_arr.shape[0])
    phi_arr = np.asarray(phi, dtype=complex)
    if phi_arr.size == 2 * n:
        phi_arr = phi_arr.reshape(n, 2)
    return WalkParameters(n=n, p=p_arr, q=np.atleast_1d(np.asarray(q, dtype=complex)), phi=phi_arr)


def _parse_complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ParameterError(f"{where}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ParameterError(f"{where}: expected a number or [re, im], got {value!r}")


def params_from_dict(raw: Mapping) -> WalkParameters:
    """
    Build parameters from the JSON layout ``{"n", "p", "q", "phi"}``.

    ``q`` entries and the ``phi`` components are ``[re, im]`` pairs (plain
    reals are accepted too).  ``n`` is optional and inferred from ``p``.
    """
    for key in ("p", "q", "phi"):
        if key not in raw:
            raise ParameterError(f"missing parameter key {key!r}")
    p = raw["p"]
    if not isinstance(p, (list, tuple)):
        raise ParameterError("'p' must be a list of reals")
    n = raw.get("n", len(p))
    q = [_parse_complex(v, f"q[{i}]") for i, v in enumerate(raw["q"])]
    phi_raw = raw["phi"]
    if not isinstance(phi_raw, (list, tuple)) or any(
        not isinstance(pair, (list, tuple)) or len(pair) != 2 for pair in phi_raw
    ):
        raise ParameterError("'phi' must be a list of n pairs [Phi_j1, Phi_j2]")
    phi = [[_parse_complex(c, f"phi[{j}][{k}]") for k, c in enumerate(pair)] for j, pair in enumerate(phi_raw)]
    try:
        p_vals = [float(v) for v in p]
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"'p' must be a list of reals: {exc}") from None
    return WalkParameters(n=n, p=np.array(p_vals), q=np.array(q), phi=np.array(phi, dtype=complex).reshape(-1, 2))


# --------------------------------------------------------------------------
# lattice windows and states
# --------------------------------------------------------------------------


class WindowKind(str, enum.Enum):
    ZERO_PADDED = "ZeroPadded"
    PERIODIC_TORUS = "PeriodicTorus"


@dataclass(frozen=True)
class LatticeWindow:
    """
    Finite piece of Z^n.

    For ``ZERO_PADDED`` the radii are half-widths (|x_j| <= R_j) and anything
    outside counts as zero.  For ``PERIODIC_TORUS`` they are periods N_j and
    x_j runs over ``-(N_j // 2) .. ceil(N_j / 2) - 1`` with arithmetic mod N_j.
    """

    kind: WindowKind
    radii: tuple[int, ...]

    def __post_init__(self) -> None:
        radii = tuple(int(r) for r in self.radii)
        if not radii:
            raise WindowMismatch("window needs at least one axis")
        minimum = 1 if self.kind is WindowKind.PERIODIC_TORUS else 0
        if any(r < minimum for r in radii):
            raise WindowMismatch(f"window radii must be >= {minimum}, got {radii}")
        object.__setattr__(self, "kind", WindowKind(self.kind))
        object.__setattr__(self, "radii", radii)

    @classmethod
    def zero_padded(cls, radius: int | Sequence[int], n: int = 1) -> LatticeWindow:
        radii = (radius,) * n if isinstance(radius, (int, np.integer)) else tuple(radius)
        return cls(WindowKind.ZERO_PADDED, radii)

    @classmethod
    def torus(cls, period: int | Sequence[int], n: int = 1) -> LatticeWindow:
        radii = (period,) * n if isinstance(period, (int, np.integer)) else tuple(period)
        return cls(WindowKind.PERIODIC_TORUS, radii)

    @property
    def n(self) -> int:
        return len(self.radii)

    @property
    def periodic(self) -> bool:
        return self.kind is WindowKind.PERIODIC_TORUS

    @property
    def shape(self) -> tuple[int, ...]:
        if self.periodic:
            return self.radii
        return tuple(2 * r + 1 for r in self.radii)

    @property
    def num_sites(self) -> int:
        return math.prod(self.shape)

    @property
    def origin_index(self) -> tuple[int, ...]:
        if self.periodic:
            return tuple(N // 2 for N in self.radii)
        return self.radii

    def coords(self, axis: int) -> NDArray[np.int64]:
        """Integer coordinates along one axis, in storage order."""
        size = self.shape[axis]
        return np.arange(size, dtype=np.int64) - self.origin_index[axis]

    def site_array(self) -> NDArray[np.int64]:
        """All sites, lexicographic, as an array of shape (num_sites, n)."""
        grids = np.meshgrid(*(self.coords(a) for a in range(self.n)), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    def contains(self, site: Sequence[int]) -> bool:
        site = tuple(int(s) for s in site)
        if len(site) != self.n:
            return False
        if self.periodic:
            return True
        return all(abs(x) <= r for x, r in zip(site, self.radii))

    def index_of(self, site: Sequence[int]) -> tuple[int, ...]:
        site = tuple(int(s) for s in site)
        if len(site) != self.n:
            raise WindowMismatch(f"site {site} has wrong dimension for an n={self.n} window")
        if self.periodic:
            return tuple((x + o) % N for x, o, N in zip(site, self.origin_index, self.radii))
        if not self.contains(site):
            raise WindowMismatch(f"site {site} lies outside the window {self.radii}")
        return tuple(x + o for x, o in zip(site, self.origin_index))


def _check_site_budget(window: LatticeWindow, budget: int | None) -> None:
    budget = DEFAULT_SITE_BUDGET if budget is None else budget
    if window.num_sites > budget:
        raise ResourceLimit(f"window with {window.num_sites} sites exceeds the site budget {budget}")


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """A state on a lattice window; ``amplitudes`` has shape ``(*window.shape, n, 2)``."""

    window: LatticeWindow
    amplitudes: NDArray[np.complex128]

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = (*self.window.shape, self.window.n, 2)
        if amps.shape != expected:
            raise WindowMismatch(f"amplitudes have shape {amps.shape}, window expects {expected}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return self.window.n

    @classmethod
    def zeros(cls, window: LatticeWindow) -> WaveFunction:
        return cls(window, np.zeros((*window.shape, window.n, 2), dtype=complex))

    @classmethod
    def delta(cls, window: LatticeWindow, site: Sequence[int], vector: ArrayLike) -> WaveFunction:
        """``delta_site (x) vector`` with ``vector`` of length 2n in (j, k) order."""
        psi = cls.zeros(window)
        vec = np.asarray(vector, dtype=complex).reshape(window.n, 2)
        psi.amplitudes[window.index_of(site)] = vec
        return psi

    @classmethod
    def from_sites(cls, window: LatticeWindow, entries: Mapping[tuple[int, ...], ArrayLike]) -> WaveFunction:
        psi = cls.zeros(window)
        for site, vec in entries.items():
            psi.amplitudes[window.index_of(site)] += np.asarray(vec, dtype=complex).reshape(window.n, 2)
        return psi

    def copy(self) -> WaveFunction:
        return WaveFunction(self.window, self.amplitudes.copy())

    def at(self, site: Sequence[int]) -> NDArray[np.complex128]:
        """The 2n-vector at ``site`` (zero outside a zero-padded window)."""
        if not self.window.contains(site):
            return np.zeros(2 * self.n, dtype=complex)
        return self.amplitudes[self.window.index_of(site)].reshape(-1)

    def site_norms(self) -> NDArray[np.float64]:
        """||Psi(x)||^2 for every site, shape ``window.shape``."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=(-2, -1))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes.reshape(-1)))

    def vector(self) -> NDArray[np.complex128]:
        """Flattened amplitudes in canonical basis order."""
        return self.amplitudes.reshape(-1)

    def support_radius(self) -> int:
        """Largest |x_j| over sites with a nonzero amplitude (0 for the zero state)."""
        mask = np.any(self.amplitudes != 0, axis=(-2, -1))
        if not mask.any():
            return 0
        idx = np.nonzero(mask)
        return int(max(np.max(np.abs(self.window.coords(a)[idx[a]])) for a in range(self.n)))

    def embed(self, window: LatticeWindow) -> WaveFunction:
        """
        Copy the amplitudes into another zero-padded window by coordinates.

        Raises :class:`WindowMismatch` if nonzero amplitude would be dropped.
        """
        if window.n != self.n:
            raise WindowMismatch("cannot embed into a window of different dimension")
        if window.periodic:
            raise WindowMismatch("embedding targets must be zero-padded windows")
        out = WaveFunction.zeros(window)
        src_slices, dst_slices = [], []
        for a in range(self.n):
            src = self.window.coords(a)
            lo, hi = max(src[0], -window.radii[a]), min(src[-1], window.radii[a])
            if lo > hi:
                if np.any(self.amplitudes):
                    raise WindowMismatch("target window does not overlap the state")
                return out
            src_slices.append(slice(lo - src[0], hi - src[0] + 1))
            dst_slices.append(slice(lo + window.radii[a], hi + window.radii[a] + 1))
        kept = self.amplitudes[tuple(src_slices)]
        if np.count_nonzero(kept) != np.count_nonzero(self.amplitudes):
            raise WindowMismatch("target window would truncate nonzero amplitudes")
        out.amplitudes[tuple(dst_slices)] = kept
        return out

    def padded(self, extra: int = 1) -> WaveFunction:
        """The same state on a zero-padded window grown by ``extra`` sites per side."""
        if self.window.periodic:
            raise WindowMismatch("padding applies to zero-padded windows only")
        return self.embed(LatticeWindow.zero_padded([r + extra for r in self.window.radii]))

    def inner(self, other: WaveFunction) -> complex:
        """<self, other>, antilinear in ``self``; windows must match."""
        if other.window != self.window:
            raise WindowMismatch("inner product needs states on the same window")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_rows(self, *, skip_zero: bool = False) -> Iterator[tuple]:
        """Serialization rows ``(*x, j, k, re, im)`` with 1-based j, k."""
        sites = self.window.site_array()
        amps = self.amplitudes.reshape(len(sites), self.n, 2)
        for s, site in enumerate(sites):
            if skip_zero and not np.any(amps[s]):
                continue
            for j in range(self.n):
                for k in range(2):
                    z = amps[s, j, k]
                    yield (*(int(v) for v in site), j + 1, k + 1, z.real, z.imag)


# --------------------------------------------------------------------------
# array kernels (leading batch axes allowed)
# --------------------------------------------------------------------------


def _translate(f: np.ndarray, axis: int, step: int, periodic: bool) -> np.ndarray:
    """g(x) = f(x + step * e_axis); ``axis`` may be negative."""
    g = np.roll(f, -step, axis=axis)
    if not periodic and step != 0:
        sl = [slice(None)] * f.ndim
        sl[axis] = slice(-step, None) if step > 0 else slice(None, -step)
        g[tuple(sl)] = 0
    return g


def chi_field(params: WalkParameters, window: LatticeWindow, *, defect: bool = True) -> NDArray[np.complex128]:
    """chi sampled on ``window``: Phi everywhere, and 0 at the origin when ``defect``."""
    chi = np.broadcast_to(params.phi, (*window.shape, params.n, 2)).copy()
    if defect:
        chi[window.origin_index] = 0
    return chi


def _shift_kernel(params: WalkParameters, amps: np.ndarray, periodic: bool) -> np.ndarray:
    n = params.n
    out = np.empty_like(amps)
    for j in range(n):
        ax = j - n  # axis j of the component slices below
        psi1 = amps[..., j, 0]
        psi2 = amps[..., j, 1]
        out[..., j, 0] = params.p[j] * psi1 + params.q[j] * _translate(psi2, ax, +1, periodic)
        out[..., j, 1] = np.conj(params.q[j]) * _translate(psi1, ax, -1, periodic) - params.p[j] * psi2
    return out


def _coin_kernel(chi: np.ndarray, amps: np.ndarray) -> np.ndarray:
    overlap = np.sum(np.conj(chi) * amps, axis=(-2, -1))
    return 2.0 * overlap[..., None, None] * chi - amps


def _check_state(params: WalkParameters, psi: WaveFunction) -> None:
    if psi.n != params.n:
        raise WindowMismatch(f"state has dimension {psi.n}, parameters have n={params.n}")


def apply_shift(params: WalkParameters, psi: WaveFunction) -> WaveFunction:
    """S psi on the same window (zero outside a zero-padded window, wrapped on a torus)."""
    _check_state(params, psi)
    return WaveFunction(psi.window, _shift_kernel(params, psi.amplitudes, psi.window.periodic))


def apply_coin(params: WalkParameters, psi: WaveFunction, *, defect: bool = True) -> WaveFunction:
    """
    C psi, i.e. ``2 <chi(x), psi(x)> chi(x) - psi(x)`` sitewise.

    With ``defect=False`` the homogeneous coin ``2|Phi><Phi| - 1`` is used at
    every site, including the origin.
    """
    _check_state(params, psi)
    return WaveFunction(psi.window, _coin_kernel(chi_field(params, psi.window, defect=defect), psi.amplitudes))


def apply_evolution(params: WalkParameters, psi: WaveFunction, *, defect: bool = True) -> WaveFunction:
    """U psi = S C psi."""
    return apply_shift(params, apply_coin(params, psi, defect=defect))


def evolve(
    params: WalkParameters,
    psi0: WaveFunction,
    steps: int,
    *,
    site_budget: int | None = None,
) -> Iterator[WaveFunction]:
    """
    Yield ``U^t psi0`` for t = 0 .. steps on an exact light-cone window.

    The state is first moved to a zero-padded window of radius
    ``R0 + steps + 1`` (R0 the support radius of ``psi0``).  One step moves
    support by at most one site per axis, so nothing ever reaches the edge
    and the snapshots coincide with the infinite-lattice dynamics.

    Raises
    ------
    ResourceLimit
        If that window has more sites than ``site_budget``.
    """
    _check_state(params, psi0)
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    radius = psi0.support_radius() + steps + 1
    window = LatticeWindow.zero_padded(radius, params.n)
    _check_site_budget(window, site_budget)
    psi = (_torus_to_padded(psi0) if psi0.window.periodic else psi0).embed(window)
    chi = chi_field(params, window)
    amps = psi.amplitudes
    yield psi
    for _ in range(steps):
        amps = _shift_kernel(params, _coin_kernel(chi, amps), False)
        yield WaveFunction(window, amps)


def _torus_to_padded(psi: WaveFunction) -> WaveFunction:
    # Torus coordinates already lie in -(N//2) .. ceil(N/2)-1; reinterpret them as a finite patch.
    radii = [N // 2 for N in psi.window.radii]
    out = WaveFunction.zeros(LatticeWindow.zero_padded(radii))
    sl = tuple(slice(0, N) for N in psi.window.radii)
    out.amplitudes[sl] = psi.amplitudes
    return out
