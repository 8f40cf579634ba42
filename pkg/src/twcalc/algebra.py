"""Coefficient-space algebra of the twisted product.

A phase-space element a = sum c_{a1,a2} rho_{a1,a2} is stored as the matrix
C[a1, a2] over the per-coordinate index cutoff.  The same matrix, read in
the Hermite basis, is the kernel of the operator attached to a; under that
identification the twisted convolution is plain matrix multiplication and
never raises indices, so products at a fixed cutoff are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import TruncationError
from .hermite import hermite_batch, index_total, multi_indices
from .phase_space import (
    DEFAULT_BOX,
    GridFunction,
    check_boundary,
    _dft_kernel,
    inverse_kernel_map_grid,
    kernel_map_A_grid,
    require_same_grid,
)

TAIL_THRESHOLD = 1e-8


@dataclass
class WongCoeffMatrix:
    """Coefficients of a in the Hermite-Wong basis, indexed (alpha1, alpha2).

    ``entries`` is square of side (n_max + 1)^d, rows alpha1 (output index
    of the attached operator), columns alpha2 (input index), multi-indices
    flattened in C order.  The Frobenius norm is the L2 norm of a, and the
    matrix is Hermitian exactly when the attached operator is self-adjoint.
    """

    d: int
    n_max: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        side = (self.n_max + 1) ** self.d
        if self.entries.shape != (side, side):
            raise ValueError(f"entries shape {self.entries.shape} != {(side, side)}")

    @property
    def side(self) -> int:
        return (self.n_max + 1) ** self.d

    def indices(self) -> list[tuple[int, ...]]:
        return multi_indices(self.d, self.n_max)

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def copy(self) -> "WongCoeffMatrix":
        return WongCoeffMatrix(self.d, self.n_max, self.entries.copy())


def unit_entry(d: int, n_max: int, pair) -> WongCoeffMatrix:
    """Matrix with a single unit coefficient at the given (alpha1, alpha2)."""
    idx = multi_indices(d, n_max)
    a1, a2 = pair
    a1 = (a1,) if np.isscalar(a1) else tuple(a1)
    a2 = (a2,) if np.isscalar(a2) else tuple(a2)
    entries = np.zeros((len(idx), len(idx)), dtype=complex)
    entries[idx.index(a1), idx.index(a2)] = 1.0
    return WongCoeffMatrix(d, n_max, entries)


def expand(a: GridFunction, n_max: int, strict: bool = True,
           tail_threshold: float = TAIL_THRESHOLD) -> WongCoeffMatrix:
    """Hermite-Wong coefficients <a, rho_{a1,a2}> by phase-space quadrature.

    Since the kernel map is unitary, the pairing is taken against the
    Hermite tensor basis on the kernel side, which avoids materializing the
    full rho stack.  Errors out when more than ``tail_threshold`` of the
    squared mass lies outside the index box.
    """
    d = a.dims // 2
    K = kernel_map_A_grid(a, strict=strict)
    axis = K.axis()
    hs = hermite_batch(n_max, axis)
    w = K.spacing
    if d == 1:
        C = (hs @ K.values @ hs.T) * w * w
    else:
        C = np.einsum("ijkl,ai,bj,ck,el->abce", K.values, hs, hs, hs, hs, optimize=True)
        C = (w ** 4) * C.reshape((n_max + 1) ** 2, (n_max + 1) ** 2)
    out = WongCoeffMatrix(d, n_max, C)
    total = a.norm() ** 2
    if total > 0:
        tail = max(0.0, total - out.norm() ** 2) / total
        if tail > tail_threshold:
            raise TruncationError(
                f"index box n_max={n_max} captures too little of the input: "
                f"tail fraction {tail:.3e}", fraction=tail)
    return out


def synthesize(C: WongCoeffMatrix, box_half_width: float = DEFAULT_BOX,
               points_per_axis: int | None = None) -> GridFunction:
    """Pointwise sum of c_{a1,a2} rho_{a1,a2} on the phase-space grid.

    Runs through the inverse kernel map on an odd refinement of the target
    grid (where the map is exact), then decimates, so even point counts are
    served without interpolation.
    """
    if points_per_axis is None:
        points_per_axis = 129 if C.d == 1 else 33
    n = points_per_axis
    work_n = n if n % 2 == 1 else 2 * n - 1
    axis = np.linspace(-box_half_width, box_half_width, work_n)
    hs = hermite_batch(C.n_max, axis)
    if C.d == 1:
        K = hs.T @ C.entries @ hs
        kern = GridFunction(2, box_half_width, work_n, K)
    else:
        m = C.n_max + 1
        C4 = C.entries.reshape(m, m, m, m)     # (a1, b1?) rows are alpha1=(a,b)
        K = np.einsum("abce,ai,bj,ck,el->ijkl", C4, hs, hs, hs, hs, optimize=True)
        kern = GridFunction(4, box_half_width, work_n, K)
    out = inverse_kernel_map_grid(kern)
    if work_n != n:
        sl = (slice(None, None, 2),) * out.dims
        out = GridFunction(out.dims, box_half_width, n, out.values[sl])
    return out


def kernel_map_A_coeff(C: WongCoeffMatrix) -> WongCoeffMatrix:
    """Relabel rho_{a1,a2} -> h_{a1} (x) h_{a2}: the identity on entries.

    The result is to be read as Hermite coefficients of the kernel of the
    attached operator; the norm is preserved exactly.
    """
    return C.copy()


def twisted_convolution_coeff(Ca: WongCoeffMatrix, Cb: WongCoeffMatrix) -> WongCoeffMatrix:
    """Twisted convolution as operator composition: the matrix product.

    rho_{a1,a2} *s rho_{b1,b2} = delta_{a2,b1} rho_{a1,b2}; no truncation
    error arises at a fixed cutoff because indices are never raised.
    """
    if (Ca.d, Ca.n_max) != (Cb.d, Cb.n_max):
        raise ValueError("operands must share d and n_max")
    return WongCoeffMatrix(Ca.d, Ca.n_max, Ca.entries @ Cb.entries)


def twisted_left_matrix(a: GridFunction, strict: bool = True) -> np.ndarray:
    """Dense quadrature operator psi -> a *s psi on the grid, shape (n^2, n^2).

    Oracle-only: O(n^4) storage.  Requires an odd point count so that the
    shifted samples a(X - Y) fall on grid nodes.
    """
    if a.dims != 2:
        raise ValueError("grid twisted convolution is implemented for d = 1 only")
    n = a.points_per_axis
    if n % 2 == 0:
        raise ValueError("grid twisted convolution needs an odd points_per_axis")
    if n > 85:
        raise ValueError("grid too large for the dense oracle; use n <= 85")
    check_boundary(a, strict, what="twisted convolution factor")
    dx = a.spacing
    E = _dft_kernel(a.box_half_width, n)
    o = n - 1
    h = (n - 1) // 2
    pad = np.zeros((2 * n - 1, 2 * n - 1), dtype=complex)
    pad[o - h: o - h + n, o - h: o - h + n] = a.values
    s0, s1 = pad.strides
    shift = as_strided(pad[o:, o:], shape=(n, n, n, n), strides=(s0, s1, -s0, -s1))
    # phase e^{2i sigma(X, Y)} = e^{2i y_m xi_k} e^{-2i x_i eta_n}, blocked over i
    const = (2.0 / np.pi) ** 0.5 * dx * dx
    EcT = np.ascontiguousarray(np.conj(E).T)[None, :, :, None]
    out = np.empty((n * n, n * n), dtype=complex)
    blk = max(1, (1 << 24) // (n * n * n))
    buf = np.empty((blk, n, n, n), dtype=complex)
    for i0 in range(0, n, blk):
        i1 = min(n, i0 + blk)
        M = buf[: i1 - i0]
        np.multiply(shift[i0:i1], EcT, out=M)
        M *= E[i0:i1, None, None, :]
        out[i0 * n: i1 * n] = M.reshape((i1 - i0) * n, n * n)
    out *= const
    return out


def twisted_convolution_grid(a: GridFunction, b: GridFunction, strict: bool = True) -> GridFunction:
    """Direct quadrature of the defining twisted-convolution integral.

    (a *s b)(X) = (2/pi)^{d/2} Int a(X - Y) b(Y) e^{2i sigma(X,Y)} dY,
    evaluated at every output node.  Small odd grids only; this is the
    independent oracle for the coefficient product.
    """
    require_same_grid(a, b)
    check_boundary(b, strict, what="twisted convolution factor")
    K = twisted_left_matrix(a, strict=strict)
    out = (K @ b.values.reshape(-1)).reshape(b.values.shape)
    return GridFunction(a.dims, a.box_half_width, a.points_per_axis, out)


def fsigma_coeff(C: WongCoeffMatrix) -> WongCoeffMatrix:
    """Symplectic Fourier transform in coefficient space: the diagonal sign map.

    rho_{a1,a2} is an eigenfunction with eigenvalue (-1)^{|a1|}, so rows
    flip sign by parity of alpha1; exact, never the FFT.
    """
    signs = np.array([(-1.0) ** index_total(a) for a in C.indices()])
    return WongCoeffMatrix(C.d, C.n_max, signs[:, None] * C.entries)


def weyl_quantize(C: WongCoeffMatrix) -> np.ndarray:
    """Matrix of the Weyl operator of the symbol a in the Hermite basis.

    Op(a) = (2pi)^{-d/2} A(F_s a); the result M satisfies
    Op(a) h_beta = sum_gamma M[gamma, beta] h_gamma.
    """
    return (2.0 * np.pi) ** (-C.d / 2.0) * fsigma_coeff(C).entries


def weyl_product(Ca: WongCoeffMatrix, Cb: WongCoeffMatrix) -> WongCoeffMatrix:
    """The symbol product # with Op(a # b) = Op(a) Op(b).

    a # b = (2pi)^{-d/2} a *s (F_s b), all three steps exact in coefficient
    space.  The prefactor is pinned by the quantization homomorphism.
    """
    if (Ca.d, Ca.n_max) != (Cb.d, Cb.n_max):
        raise ValueError("operands must share d and n_max")
    scaled = (2.0 * np.pi) ** (-Ca.d / 2.0)
    return WongCoeffMatrix(Ca.d, Ca.n_max, scaled * Ca.entries @ fsigma_coeff(Cb).entries)


def wong_to_json(C: WongCoeffMatrix, meta: dict | None = None) -> str:
    """JSON form {"d", "n_max", "entries": [[a1..., a2..., re, im], ...]}."""
    idx = C.indices()
    rows = []
    for i, a1 in enumerate(idx):
        for j, a2 in enumerate(idx):
            v = C.entries[i, j]
            if v != 0:
                rows.append([*a1, *a2, v.real, v.imag])
    obj = {"d": C.d, "n_max": C.n_max, "entries": rows}
    if meta:
        obj.update(meta)
    return json.dumps(obj, sort_keys=True)


def wong_from_json(text: str) -> WongCoeffMatrix:
    obj = json.loads(text)
    d, n_max = int(obj["d"]), int(obj["n_max"])
    idx = multi_indices(d, n_max)
    lookup = {a: i for i, a in enumerate(idx)}
    entries = np.zeros((len(idx), len(idx)), dtype=complex)
    for row in obj["entries"]:
        a1 = tuple(int(v) for v in row[:d])
        a2 = tuple(int(v) for v in row[d:2 * d])
        entries[lookup[a1], lookup[a2]] = row[2 * d] + 1j * row[2 * d + 1]
    return WongCoeffMatrix(d, n_max, entries)
