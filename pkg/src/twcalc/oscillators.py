"""The symplectic oscillator pair and its ladder factorization.

H_sig = (|X|^2 - Delta/4) + <xi, D_x> - <x, D_xi> with D = -i d/dx, its
conjugate H_bar flips the rotation sign, and T = H_sig o H_bar.  All three
are diagonal in the Hermite-Wong basis:

    H_sig rho_{a1,a2} = (2|a1| + d) rho,   H_bar rho = (2|a2| + d) rho,

so the coefficient realizations are exact entrywise scalings.  The grid
realization (4th-order finite differences) exists only to cross-validate
those eigenvalues, and the ladder factorization is a structural self-test.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import TruncationWarning
from .algebra import WongCoeffMatrix
from .hermite import oscillator_eigenvalues
from .phase_space import GridFunction, check_boundary

LADDER_FAMILIES = ("Z1", "Z1_tilde", "Z2", "Z2_tilde")


@dataclass
class LadderKind:
    """One of the four ladder families, acting along a coordinate axis."""

    family: str
    axis: int = 0

    def __post_init__(self):
        if self.family not in LADDER_FAMILIES:
            raise ValueError(f"family must be one of {LADDER_FAMILIES}")
        if self.axis < 0:
            raise ValueError("axis must be >= 0")


def _eigs(C: WongCoeffMatrix) -> np.ndarray:
    return oscillator_eigenvalues(C.d, C.n_max)


def apply_h_sigma_coeff(C: WongCoeffMatrix) -> WongCoeffMatrix:
    """Scale c_{a1,a2} by (2|a1| + d); exact."""
    return WongCoeffMatrix(C.d, C.n_max, _eigs(C)[:, None] * C.entries)


def apply_h_bar_sigma_coeff(C: WongCoeffMatrix) -> WongCoeffMatrix:
    """Scale c_{a1,a2} by (2|a2| + d); exact."""
    return WongCoeffMatrix(C.d, C.n_max, C.entries * _eigs(C)[None, :])


def t_sigma_log_scale(C: WongCoeffMatrix, N: int) -> np.ndarray:
    """log of the T^N eigenvalue factor per entry; the scaling is positive."""
    lg = np.log(_eigs(C))
    return N * (lg[:, None] + lg[None, :])


def apply_t_sigma_coeff(C: WongCoeffMatrix, N: int) -> WongCoeffMatrix:
    """Scale by ((2|a1| + d)(2|a2| + d))^N, accumulated in the log domain.

    Raises OverflowError when the linear-domain result cannot be
    represented; use apply_t_sigma_log for the log-magnitude entries.
    """
    if N < 0:
        raise ValueError("power must be >= 0")
    if N == 0:
        return C.copy()
    logs = t_sigma_log_scale(C, N)
    with np.errstate(divide="ignore"):
        peak = np.max(logs + np.log(np.maximum(np.abs(C.entries), 1e-300)))
    if peak > 700.0:
        raise OverflowError(
            "T^N scaling overflows the linear domain; use apply_t_sigma_log")
    return WongCoeffMatrix(C.d, C.n_max, C.entries * np.exp(logs))


def apply_t_sigma_log(C: WongCoeffMatrix, N: int) -> np.ndarray:
    """log |entries of T^N a|; -inf where the entry vanishes.

    The scaling factors are positive reals, so phases are those of C.
    """
    with np.errstate(divide="ignore"):
        return np.log(np.abs(C.entries)) + t_sigma_log_scale(C, N)


def apply_ladder(C: WongCoeffMatrix, kind: LadderKind) -> WongCoeffMatrix:
    """One ladder step with the square-root factors and signs

        Z1:       c_{a1, a2} -> +sqrt(2 a2_j) c at (a1, a2 - e_j)
        Z1_tilde: c_{a1, a2} -> -sqrt(2 a2_j + 2) c at (a1, a2 + e_j)
        Z2:       c_{a1, a2} -> -sqrt(2 a1_j) c at (a1 - e_j, a2)
        Z2_tilde: c_{a1, a2} -> +sqrt(2 a1_j + 2) c at (a1 + e_j, a2)

    Lowering annihilates at index zero.  Raising past n_max drops the term
    and emits a TruncationWarning; callers needing exactness pre-pad n_max.
    """
    if kind.axis >= C.d:
        raise ValueError(f"axis {kind.axis} out of range for d={C.d}")
    m = C.n_max + 1
    shape = (m,) * C.d + (m,) * C.d
    T = C.entries.reshape(shape)
    slot = kind.axis if kind.family in ("Z2", "Z2_tilde") else C.d + kind.axis
    k = np.arange(m, dtype=float)
    out = np.zeros_like(T)

    def mov(src, dst):
        sl_src = [slice(None)] * 2 * C.d
        sl_src[slot] = src
        sl_dst = [slice(None)] * 2 * C.d
        sl_dst[slot] = dst
        return tuple(sl_src), tuple(sl_dst)

    lowering = kind.family in ("Z1", "Z2")
    if lowering:
        # entry at index k contributes to index k - 1 with weight sqrt(2k)
        w = np.sqrt(2 * k[1:])
        src, dst = mov(slice(1, None), slice(0, m - 1))
        out[dst] = _along(T[src], w, slot)
        if kind.family == "Z2":
            out = -out
    else:
        # entry at index k contributes to index k + 1 with weight sqrt(2k + 2)
        w = np.sqrt(2 * k[: m - 1] + 2)
        src, dst = mov(slice(0, m - 1), slice(1, None))
        out[dst] = _along(T[src], w, slot)
        if kind.family == "Z1_tilde":
            out = -out
        top = [slice(None)] * 2 * C.d
        top[slot] = m - 1
        dropped = T[tuple(top)]
        if np.any(dropped != 0):
            warnings.warn(
                f"raising past n_max={C.n_max} dropped coefficients "
                f"(mass {float(np.sum(np.abs(dropped) ** 2)):.3e})",
                TruncationWarning, stacklevel=2)
    side = (C.n_max + 1) ** C.d
    return WongCoeffMatrix(C.d, C.n_max, out.reshape(side, side))


def _along(block: np.ndarray, weights: np.ndarray, slot: int) -> np.ndarray:
    shape = [1] * block.ndim
    shape[slot] = len(weights)
    return block * weights.reshape(shape)


def h_sigma_from_ladders(C: WongCoeffMatrix) -> WongCoeffMatrix:
    """H_sig assembled as -(1/2) sum_j (Z2_j Z2t_j + Z2t_j Z2_j).

    Structural self-test for apply_h_sigma_coeff: the two must agree to
    machine precision.  Internally padded one index so the raising steps
    never truncate.
    """
    return _from_ladders(C, "Z2", "Z2_tilde")


def h_bar_sigma_from_ladders(C: WongCoeffMatrix) -> WongCoeffMatrix:
    """Mirror factorization of H_bar through the Z1 family."""
    return _from_ladders(C, "Z1", "Z1_tilde")


def _from_ladders(C: WongCoeffMatrix, lower: str, raise_: str) -> WongCoeffMatrix:
    padded = _pad(C, 1)
    acc = np.zeros_like(padded.entries)
    for j in range(C.d):
        lo = LadderKind(lower, j)
        hi = LadderKind(raise_, j)
        first = apply_ladder(apply_ladder(padded, hi), lo)
        second = apply_ladder(apply_ladder(padded, lo), hi)
        acc += first.entries + second.entries
    out = WongCoeffMatrix(C.d, C.n_max + 1, -0.5 * acc)
    return _crop(out, C.n_max)


def _pad(C: WongCoeffMatrix, extra: int) -> WongCoeffMatrix:
    m, mm = C.n_max + 1, C.n_max + 1 + extra
    src = C.entries.reshape((m,) * 2 * C.d)
    dst = np.zeros((mm,) * 2 * C.d, dtype=complex)
    dst[(slice(0, m),) * 2 * C.d] = src
    side = mm ** C.d
    return WongCoeffMatrix(C.d, C.n_max + extra, dst.reshape(side, side))


def _crop(C: WongCoeffMatrix, n_max: int) -> WongCoeffMatrix:
    m, mm = n_max + 1, C.n_max + 1
    src = C.entries.reshape((mm,) * 2 * C.d)
    out = src[(slice(0, m),) * 2 * C.d]
    side = m ** C.d
    return WongCoeffMatrix(C.d, n_max, out.reshape(side, side).copy())


def _diff4(a: np.ndarray, axis: int, h: float, order: int) -> np.ndarray:
    """4th-order central difference, zero beyond the boundary."""
    def sh(k):
        out = np.roll(a, -k, axis)
        idx = [slice(None)] * a.ndim
        if k > 0:
            idx[axis] = slice(-k, None)
        else:
            idx[axis] = slice(0, -k)
        out[tuple(idx)] = 0.0
        return out
    if order == 1:
        out = (-sh(2) + 8 * sh(1) - 8 * sh(-1) + sh(-2)) / (12 * h)
    else:
        out = (-sh(2) + 16 * sh(1) - 30 * a + 16 * sh(-1) - sh(-2)) / (12 * h * h)
    return out


def apply_h_sigma_grid(a: GridFunction, strict: bool = True, conjugate: bool = False) -> GridFunction:
    """Finite-difference realization of H_sig (or H_bar) on the grid.

    Oracle only: validates the coefficient eigenvalues.  D = -i d/dx, so
    the rotation term is -i xi d_x + i x d_xi (sign flipped for H_bar).
    """
    if a.dims not in (2, 4):
        raise ValueError("expects a phase-space function")
    check_boundary(a, strict, threshold=1e-6, what="oscillator input")
    d = a.dims // 2
    dx = a.spacing
    axis = a.axis()
    v = a.values
    lap = sum(_diff4(v, ax, dx, 2) for ax in range(a.dims))
    radial = np.zeros_like(v)
    grids = np.meshgrid(*([axis] * a.dims), indexing="ij", sparse=True)
    for g in grids:
        radial = radial + g ** 2
    rot = np.zeros_like(v)
    sign = -1.0 if conjugate else 1.0
    for j in range(d):
        xi_j = grids[d + j]
        x_j = grids[j]
        rot = rot + sign * (-1j * xi_j * _diff4(v, j, dx, 1) + 1j * x_j * _diff4(v, d + j, dx, 1))
    out = radial * v - 0.25 * lap + rot
    return GridFunction(a.dims, a.box_half_width, a.points_per_axis, out)


def partial_oscillator_coeff(kernel: WongCoeffMatrix, factor: int) -> WongCoeffMatrix:
    """Partial harmonic oscillator acting on one tensor slot of a kernel.

    factor 1 scales rows by (2|a1| + d); factor 2 scales columns, matching
    (|x|^2 - Delta_x) and (|y|^2 - Delta_y) on kernels K(x, y).
    """
    if factor == 1:
        return apply_h_sigma_coeff(kernel)
    if factor == 2:
        return apply_h_bar_sigma_coeff(kernel)
    raise ValueError("factor must be 1 or 2")


def intertwine_residual(C: WongCoeffMatrix, n1: int, n2: int) -> float:
    """Relative gap between the two routes of the intertwining identity.

    Left: scale in Hermite-Wong coefficients, then relabel through the
    kernel map.  Right: relabel first, then apply the partial oscillators
    slotwise.  Both are exact diagonal scalings, so the residual is at
    rounding level.
    """
    from .algebra import kernel_map_A_coeff

    left = C
    for _ in range(n1):
        left = apply_h_sigma_coeff(left)
    for _ in range(n2):
        left = apply_h_bar_sigma_coeff(left)
    left = kernel_map_A_coeff(left)

    right = kernel_map_A_coeff(C)
    for _ in range(n1):
        right = partial_oscillator_coeff(right, 1)
    for _ in range(n2):
        right = partial_oscillator_coeff(right, 2)

    denom = right.norm()
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(left.entries - right.entries) / denom)
