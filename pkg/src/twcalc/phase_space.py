"""Grid realizations of the phase-space transforms.

Functions here sample phase space R^{2d} on a uniform box grid, endpoints
included, axes ordered (x_1..x_d, xi_1..xi_d).  They are the quadrature
oracles against which the exact coefficient-space algebra is validated, so
sign conventions are locked:

    W_{f,g}(x,xi)   = (2pi)^{-d/2} Int f(x - y/2) conj(g(x + y/2)) e^{+i<y,xi>} dy
    (F_s a)(X)      = pi^{-d}      Int a(Y) e^{2i sigma(X,Y)} dY
    (A a)(x,y)      = (2pi)^{-d/2} Int a((y-x)/2, xi) e^{-i<x+y,xi>} dxi

with sigma(X,Y) = <y,xi> - <x,eta>.  Flipping any one sign breaks the
joint identities (eigen-signs of F_s, the product rule under A), which the
test suite pins.

All integrals are plain Riemann sums on the box; admissible inputs decay
below the boundary threshold at |x| = L, so the sums converge spectrally.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GridMismatchError, TruncationError
from .hermite import hermite_batch, index_total

DEFAULT_BOX = 8.0
DEFAULT_POINTS = 256
BOUNDARY_THRESHOLD = 1e-8
MAX_WONG_INDEX = 32

MAGIC = b"TWCG"


@dataclass
class GridFunction:
    """Complex samples on the uniform grid [-L, L]^dims, endpoints included."""

    dims: int
    box_half_width: float
    points_per_axis: int
    values: np.ndarray

    def __post_init__(self):
        if self.points_per_axis < 16:
            raise ValueError("points_per_axis must be >= 16")
        self.values = np.asarray(self.values, dtype=complex)
        expected = (self.points_per_axis,) * self.dims
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    def axis(self) -> np.ndarray:
        return np.linspace(-self.box_half_width, self.box_half_width, self.points_per_axis)

    @property
    def spacing(self) -> float:
        return 2.0 * self.box_half_width / (self.points_per_axis - 1)

    @property
    def cell(self) -> float:
        """Volume element of one grid cell."""
        return self.spacing ** self.dims

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell))

    def inner(self, other: "GridFunction") -> complex:
        require_same_grid(self, other)
        return complex(np.sum(self.values * np.conj(other.values)) * self.cell)

    def boundary_fraction(self) -> float:
        """Largest |value| on the box boundary relative to the overall max."""
        peak = float(np.max(np.abs(self.values)))
        if peak == 0.0:
            return 0.0
        worst = 0.0
        for ax in range(self.dims):
            for side in (0, -1):
                sl = [slice(None)] * self.dims
                sl[ax] = side
                worst = max(worst, float(np.max(np.abs(self.values[tuple(sl)]))))
        return worst / peak

    def copy(self) -> "GridFunction":
        return GridFunction(self.dims, self.box_half_width, self.points_per_axis, self.values.copy())


def require_same_grid(a: GridFunction, b: GridFunction):
    if (a.dims, a.box_half_width, a.points_per_axis) != (b.dims, b.box_half_width, b.points_per_axis):
        raise GridMismatchError(
            f"grids differ: ({a.dims}, {a.box_half_width}, {a.points_per_axis}) vs "
            f"({b.dims}, {b.box_half_width}, {b.points_per_axis})"
        )


def check_boundary(f: GridFunction, strict: bool, threshold: float = BOUNDARY_THRESHOLD, what: str = "input"):
    """Strict mode errors on boundary mass; permissive mode warns.

    The threshold is relative and intentionally looser than the decay the
    contracts assume, so that order-32 Hermite content on the default box
    passes while genuinely truncated inputs do not.
    """
    frac = f.boundary_fraction()
    if frac > threshold:
        msg = f"{what} carries boundary mass {frac:.3e} (threshold {threshold:.1e}); enlarge the box"
        if strict:
            raise TruncationError(msg, fraction=frac)
        warnings.warn(msg, stacklevel=3)


@lru_cache(maxsize=8)
def _dft_kernel(L: float, n: int) -> np.ndarray:
    """E[m, k] = exp(-2i x_m x_k) on the axis grid; symmetric."""
    x = np.linspace(-L, L, n)
    return np.exp(-2j * np.outer(x, x))


def wigner(f: GridFunction, g: GridFunction, strict: bool = True) -> GridFunction:
    """Cross-Wigner distribution of f and g, on the tensor-squared grid.

    Per x-slice the y-integral is taken over the lattice y = 2(x_m - x_i),
    where both f(x - y/2) and g(x + y/2) land exactly on sample points, and
    the oscillatory sum is one dense DFT-style matrix product.
    """
    require_same_grid(f, g)
    if f.dims not in (1, 2):
        raise ValueError("wigner supports d in {1, 2}")
    check_boundary(f, strict, what="wigner input f")
    check_boundary(g, strict, what="wigner input g")
    d, n = f.dims, f.points_per_axis
    dx = f.spacing
    E = _dft_kernel(f.box_half_width, n)
    const = (2.0 * np.pi) ** (-d / 2.0) * (2.0 * dx) ** d
    idx = np.arange(n)
    if d == 1:
        pos = 2 * idx[:, None] - idx[None, :]
        ok = (pos >= 0) & (pos < n)
        gs = np.where(ok, np.conj(g.values)[np.clip(pos, 0, n - 1)], 0.0)
        corr = f.values[None, :] * gs                       # [i, m]
        W = const * (corr @ E) * np.conj(E)                 # [i, k]
        return GridFunction(2, f.box_half_width, n, W)
    if n > 81:
        raise ValueError("d = 2 grids above 81 points per axis are not supported")
    pos = 2 * idx[:, None] - idx[None, :]
    ok = (pos >= 0) & (pos < n)
    pc = np.clip(pos, 0, n - 1)
    gv = np.conj(g.values)
    Ec = np.conj(E)
    W = np.empty((n, n, n, n), dtype=complex)
    for i1 in range(n):                                     # slice to bound memory
        rows = np.where(ok[i1][:, None], gv[pc[i1]], 0.0)   # [m1, y2-axis]
        gs = np.where(ok[:, None, :], rows[:, pc].transpose(1, 0, 2), 0.0)  # [i2, m1, m2]
        corr = f.values[None, :, :] * gs
        T = np.einsum("bmn,mk,nl->bkl", corr, E, E, optimize=True)
        W[i1] = T * (Ec[i1][None, :, None] * Ec[:, None, :])
    return GridFunction(4, f.box_half_width, n, const * W)


def hermite_wong_eval(pair, box_half_width: float = DEFAULT_BOX,
                      points_per_axis: int = DEFAULT_POINTS) -> GridFunction:
    """The Hermite-Wong basis function (-1)^{|a1|} W_{h_a1, h_a2} on the grid.

    ``pair`` is ((a1...), (a2...)) of equal dimension d in {1, 2}.
    """
    a1, a2 = normalize_pair(pair)
    d = len(a1)
    if max(max(a1), max(a2)) > MAX_WONG_INDEX:
        raise ValueError(f"indices above {MAX_WONG_INDEX} are not supported")
    axis = np.linspace(-box_half_width, box_half_width, points_per_axis)
    hs = hermite_batch(max(max(a1), max(a2)), axis)
    if d == 1:
        f = GridFunction(1, box_half_width, points_per_axis, hs[a1[0]] + 0j)
        g = GridFunction(1, box_half_width, points_per_axis, hs[a2[0]] + 0j)
        W = wigner(f, g, strict=False)
        W.values *= (-1) ** index_total(a1)
        return W
    # d = 2 factorizes across the (x_j, xi_j) axis pairs
    parts = []
    for j in range(2):
        f = GridFunction(1, box_half_width, points_per_axis, hs[a1[j]] + 0j)
        g = GridFunction(1, box_half_width, points_per_axis, hs[a2[j]] + 0j)
        w = wigner(f, g, strict=False).values * (-1) ** a1[j]
        parts.append(w)
    vals = np.einsum("ik,jl->ijkl", parts[0], parts[1])
    return GridFunction(4, box_half_width, points_per_axis, vals)


def normalize_pair(pair):
    a1, a2 = pair
    a1 = (a1,) if np.isscalar(a1) else tuple(int(v) for v in a1)
    a2 = (a2,) if np.isscalar(a2) else tuple(int(v) for v in a2)
    if len(a1) != len(a2):
        raise ValueError("pair components must have equal dimension")
    if min(min(a1), min(a2)) < 0:
        raise ValueError("indices must be non-negative")
    return a1, a2


def symplectic_fourier(a: GridFunction, strict: bool = True) -> GridFunction:
    """Symplectic Fourier transform, an involution with eigenvalues +-1.

    (F_s a)(X) = pi^{-d} Int a(Y) e^{2i sigma(X,Y)} dY, realized as dense
    oscillatory quadrature; the grid frequencies 2 x_m x_k are not FFT
    aligned on the inclusive-endpoint box, so the kernel is applied as two
    matrix products per axis pair.
    """
    if a.dims not in (2, 4):
        raise ValueError("symplectic_fourier expects a phase-space function (dims 2 or 4)")
    check_boundary(a, strict, what="symplectic_fourier input")
    n = a.points_per_axis
    dx = a.spacing
    E = _dft_kernel(a.box_half_width, n)
    if a.dims == 2:
        out = (dx * dx / np.pi) * (E @ a.values.T @ np.conj(E))
        return GridFunction(2, a.box_half_width, n, out)
    if n > 81:
        raise ValueError("d = 2 grids above 81 points per axis are not supported")
    # separable kernel: apply the one-pair map on (y_j, eta_j) for j = 1, 2,
    # folding the spectator axes into one large GEMM per contraction
    const = dx ** 4 / np.pi ** 2
    vals = a.values
    Ec = np.conj(E)
    for pair in (0, 1):
        # pair 0 input axes (y1,y2,e1,e2); after it, (x1,y2,xi1,e2)
        work = vals.transpose(1, 3, 0, 2) if pair == 0 else vals.transpose(0, 2, 1, 3)
        X = np.ascontiguousarray(work.transpose(2, 0, 1, 3)).reshape(n, -1)  # (y_j, rest*eta)
        G = (Ec.T @ X).reshape(n, n, n, n)                                   # (k, rest, eta)
        Y = np.ascontiguousarray(G.transpose(3, 1, 2, 0)).reshape(n, -1)     # (eta, rest*k)
        T = (E @ Y).reshape(n, n, n, n)                                      # (i, rest, k)
        vals = T.transpose(1, 2, 0, 3)                                       # (rest, x_j, xi_j)
        vals = vals.transpose(2, 0, 3, 1) if pair == 0 else vals.transpose(0, 2, 1, 3)
    return GridFunction(4, a.box_half_width, n, const * np.ascontiguousarray(vals))


def kernel_map_A_grid(a: GridFunction, strict: bool = True) -> GridFunction:
    """Kernel K(x,y) of the operator attached to the phase-space function a.

    Computed as the partial inverse Fourier transform in the frequency
    variable followed by the affine pullback (x,y) -> ((y-x)/2, -(x+y)).
    The intermediate is tabulated on the half-step first axis and on the
    doubled box in the second, so the pullback's bilinear interpolation
    degenerates to exact node lookup on the output grid.
    """
    if a.dims not in (2, 4):
        raise ValueError("kernel_map_A_grid expects a phase-space function (dims 2 or 4)")
    check_boundary(a, strict, what="kernel map input")
    d = a.dims // 2
    n = a.points_per_axis
    L = a.box_half_width
    dx = a.spacing
    axis = a.axis()
    u = np.linspace(-L, L, 2 * n - 1)
    v = np.linspace(-2 * L, 2 * L, 2 * n - 1)
    S = np.sinc((u[:, None] - axis[None, :]) / dx)
    P = np.exp(1j * np.outer(axis, v))
    const = (2.0 * np.pi) ** (-d / 2.0) * dx ** d
    if d == 1:
        b = const * (S @ a.values @ P)      # [u*, v]
        i = np.arange(n)
        ui = (i[None, :] - i[:, None]) + (n - 1)
        vi = 2 * (n - 1) - (i[:, None] + i[None, :])
        K = _bilinear_lookup(b, ui.astype(float), vi.astype(float))
        return GridFunction(2, L, n, K)
    if n > 81:
        raise ValueError("d = 2 grids above 81 points per axis are not supported")
    # apply the one-pair map (resample, partial FT, pullback) per axis pair,
    # folding the spectator axes into one large GEMM per contraction
    i = np.arange(n)
    ui = (i[None, :] - i[:, None]) + (n - 1)
    vi = 2 * (n - 1) - (i[:, None] + i[None, :])
    c1 = (2.0 * np.pi) ** -0.5 * dx
    vals = a.values
    for pair in (0, 1):
        # pair 0 maps axes (x1,x2,e1,e2) to (x1,x2,y1,e2); pair 1 finishes
        work = vals.transpose(1, 3, 0, 2) if pair == 0 else vals.transpose(0, 2, 1, 3)
        X = np.ascontiguousarray(work.transpose(2, 0, 1, 3)).reshape(n, -1)  # (x_j, rest*xi)
        T = (S @ X).reshape(2 * n - 1, n, n, n)                              # (u, rest, xi)
        Y = np.ascontiguousarray(T.transpose(3, 1, 2, 0)).reshape(n, -1)     # (xi, rest*u)
        B = (P.T @ Y).reshape(2 * n - 1, n, n, 2 * n - 1)                    # (v, rest, u)
        out = c1 * B[vi, :, :, ui]                                           # (x_j, y_j, rest)
        vals = out.transpose(2, 3, 0, 1).reshape(n, n, n, n)
        vals = vals.transpose(2, 0, 3, 1) if pair == 0 else vals.transpose(0, 2, 1, 3)
    return GridFunction(4, L, n, np.ascontiguousarray(vals))


def _bilinear_lookup(b: np.ndarray, fi: np.ndarray, fj: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of b at fractional indices (fi, fj)."""
    if np.any(fi < 0) or np.any(fi > b.shape[0] - 1) or np.any(fj < 0) or np.any(fj > b.shape[1] - 1):
        raise TruncationError("pullback point outside the sampled box")
    i0 = np.minimum(np.floor(fi).astype(int), b.shape[0] - 2)
    j0 = np.minimum(np.floor(fj).astype(int), b.shape[1] - 2)
    ti = fi - i0
    tj = fj - j0
    return ((1 - ti) * (1 - tj) * b[i0, j0] + ti * (1 - tj) * b[i0 + 1, j0]
            + (1 - ti) * tj * b[i0, j0 + 1] + ti * tj * b[i0 + 1, j0 + 1])


def inverse_kernel_map_grid(K: GridFunction) -> GridFunction:
    """Inverse of the kernel map: phase-space function of a kernel K(x,y).

    a(x,xi) = (2pi)^{-d/2} 2^d Int K(w-x, w+x) e^{2i<w,xi>} dw.  The lattice
    w = x_m makes both kernel arguments exact sample points when the point
    count is odd; even grids are refused rather than silently interpolated.
    """
    if K.dims not in (2, 4):
        raise ValueError("inverse_kernel_map_grid expects dims 2 or 4")
    n = K.points_per_axis
    if n % 2 == 0:
        raise ValueError("inverse kernel map needs an odd points_per_axis")
    d = K.dims // 2
    dx = K.spacing
    E = _dft_kernel(K.box_half_width, n)
    const = (2.0 * np.pi) ** (-d / 2.0) * (2.0 * dx) ** d
    h = (n - 1) // 2
    i = np.arange(n)
    lo = (i[None, :] - i[:, None]) + h      # index of w - x   [i, m]
    hi = (i[None, :] + i[:, None]) - h      # index of w + x   [i, m]
    ok = (lo >= 0) & (lo < n) & (hi >= 0) & (hi < n)
    if d == 1:
        k = np.where(ok, K.values[np.clip(lo, 0, n - 1), np.clip(hi, 0, n - 1)], 0.0)
        out = const * (k @ np.conj(E))
        return GridFunction(2, K.box_half_width, n, out)
    loc = np.clip(lo, 0, n - 1)
    hic = np.clip(hi, 0, n - 1)
    k = K.values[loc[:, None, :, None], loc[None, :, None, :], hic[:, None, :, None], hic[None, :, None, :]]
    k = np.where(ok[:, None, :, None] & ok[None, :, None, :], k, 0.0)
    out = const * np.einsum("abmn,mk,nl->abkl", k, np.conj(E), np.conj(E), optimize=True)
    return GridFunction(4, K.box_half_width, n, out)


def write_grid(path, f: GridFunction):
    """Binary layout: magic, dims u32, L f64, points u32, then complex64 row-major.

    A JSON sidecar at ``path + '.json'`` repeats the header for tooling.
    """
    header = MAGIC + struct.pack("<IdI", f.dims, f.box_half_width, f.points_per_axis)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.values.astype(np.complex64)).tobytes())
    with open(str(path) + ".json", "w") as fh:
        json.dump({"dims": f.dims, "L": f.box_half_width, "points_per_axis": f.points_per_axis}, fh)


def read_grid(path) -> GridFunction:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a grid file: bad magic {magic!r}")
        dims, L, n = struct.unpack("<IdI", fh.read(16))
        raw = np.frombuffer(fh.read(), dtype=np.complex64)
    values = raw.reshape((n,) * dims).astype(complex)
    return GridFunction(dims, L, n, values)
