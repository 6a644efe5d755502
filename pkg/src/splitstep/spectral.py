"""Fourier pseudospectral representation on the torus [-a, a]^d.

Conventions
-----------
A real or complex function on the torus is sampled on the uniform grid
x_i = -a + 2a*i/n per axis.  Modal coefficients follow

    c_k = (2a)^(-d) * integral_Q u(x) exp(-i*pi*(k.x)/a) dx,

so c_0 is the mean value and u(x) = sum_k c_k exp(i*pi*(k.x)/a).  The
discrete transform is the FFT with a per-axis phase (-1)^k that accounts
for the domain starting at -a instead of 0.  Wavenumbers are integers in
the standard FFT layout, |k_j| <= n/2 with the Nyquist column at -n/2.

Derivative multipliers are sigma(k) = (i*pi/a)^|alpha| * k^alpha.  Odd
derivative orders zero the Nyquist column (the cosine mode has no
well-defined odd derivative on the grid).  The Laplacian multiplier uses
the Euclidean combination sum_j k_j^2, while the Sobolev norm weight uses
the 1-norm |k| = |k_1| + ... + |k_d|; the two are intentionally distinct.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import RepresentationError

__all__ = [
    "TorusGrid",
    "Field",
    "to_modal",
    "to_nodal",
    "apply_symbol",
    "derivative_symbol",
    "laplacian_symbol",
    "sobolev_norm",
    "quadrature_l2",
    "dealias_23",
    "modal_tail_fraction",
    "write_field",
    "read_field",
]

NODAL = "nodal"
MODAL = "modal"


@dataclass(frozen=True)
class TorusGrid:
    """Uniform tensor grid on [-a, a]^dim with n points per axis.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 to 3.
    a : float
        Half-width of the periodic box.
    n : int
        Points per axis; a power of two, at least 4.
    """

    dim: int
    a: float
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise RepresentationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.a > 0:
            raise RepresentationError(f"half-width a must be positive, got {self.a}")
        n = self.n
        if n < 4 or (n & (n - 1)) != 0:
            raise RepresentationError(f"n must be a power of two >= 4, got {n}")

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return 2.0 * self.a / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return (2.0 * self.a) ** self.dim

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis, x_i = -a + 2a*i/n."""
        return -self.a + self.spacing * np.arange(self.n)

    def meshes(self) -> tuple:
        """Nodal coordinate meshes, one (n,)*dim array per axis."""
        return np.meshgrid(*([self.axis()] * self.dim), indexing="ij")

    def wavenumbers(self) -> tuple:
        """Integer wavenumber meshes in FFT layout, one array per axis."""
        return _k_meshes(self)


@lru_cache(maxsize=64)
def _k_meshes(grid: TorusGrid) -> tuple:
    k1 = np.fft.fftfreq(grid.n, d=1.0 / grid.n)  # integers as float64
    return tuple(np.meshgrid(*([k1] * grid.dim), indexing="ij"))


@lru_cache(maxsize=64)
def _k_abs1(grid: TorusGrid) -> np.ndarray:
    # 1-norm |k| used by the Sobolev weight
    return sum(np.abs(k) for k in _k_meshes(grid))


@lru_cache(maxsize=64)
def _k_sq(grid: TorusGrid) -> np.ndarray:
    # Euclidean sum k_j^2 used by the Laplacian multiplier
    return sum(k * k for k in _k_meshes(grid))


@lru_cache(maxsize=64)
def _shift_phase(grid: TorusGrid) -> np.ndarray:
    # (-1)^(k_1+...+k_d): compensates the grid origin at -a
    par = sum(np.asarray(k, dtype=np.int64) for k in _k_meshes(grid)) & 1
    return np.where(par == 0, 1.0, -1.0)


@lru_cache(maxsize=64)
def _nyquist_mask(grid: TorusGrid) -> np.ndarray:
    # True where any axis sits on the Nyquist column
    mask = np.zeros(grid.shape, dtype=bool)
    for k in _k_meshes(grid):
        mask |= k == -grid.n // 2
    return mask


class Field:
    """State with ``m`` complex components on a :class:`TorusGrid`.

    ``data`` has shape ``(m,) + grid.shape`` and dtype complex128; the
    ``space`` tag records whether the values are nodal samples or modal
    coefficients.  Linear arithmetic requires matching grid and space.
    """

    __slots__ = ("grid", "data", "space")

    def __init__(self, grid: TorusGrid, data: np.ndarray, space: str = NODAL):
        if space not in (NODAL, MODAL):
            raise RepresentationError(f"space must be 'nodal' or 'modal', got {space!r}")
        data = np.asarray(data, dtype=np.complex128)
        if data.ndim == grid.dim:
            data = data[np.newaxis]
        if data.shape[1:] != grid.shape:
            raise RepresentationError(
                f"data shape {data.shape} does not match grid shape {grid.shape}"
            )
        self.grid = grid
        self.data = data
        self.space = space

    @property
    def m(self) -> int:
        return self.data.shape[0]

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy(), self.space)

    def _check_compat(self, other: "Field"):
        if self.grid != other.grid:
            raise RepresentationError("fields live on different grids")
        if self.space != other.space:
            raise RepresentationError(
                f"representation mismatch: {self.space} vs {other.space}"
            )
        if self.m != other.m:
            raise RepresentationError(f"component mismatch: {self.m} vs {other.m}")

    def __add__(self, other: "Field") -> "Field":
        self._check_compat(other)
        return Field(self.grid, self.data + other.data, self.space)

    def __sub__(self, other: "Field") -> "Field":
        self._check_compat(other)
        return Field(self.grid, self.data - other.data, self.space)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.data * scalar, self.space)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Field(m={self.m}, grid=({self.grid.dim}d, n={self.grid.n}), {self.space})"


def to_modal(f: Field) -> Field:
    """Forward transform; identity if already modal."""
    if f.space == MODAL:
        return f
    axes = tuple(range(1, f.grid.dim + 1))
    c = np.fft.fftn(f.data, axes=axes) / (f.grid.n**f.grid.dim)
    c *= _shift_phase(f.grid)
    return Field(f.grid, c, MODAL)


def to_nodal(f: Field) -> Field:
    """Inverse transform; identity if already nodal."""
    if f.space == NODAL:
        return f
    axes = tuple(range(1, f.grid.dim + 1))
    c = f.data * _shift_phase(f.grid) * (f.grid.n**f.grid.dim)
    u = np.fft.ifftn(c, axes=axes)
    return Field(f.grid, u, NODAL)


def apply_symbol(f: Field, sigma) -> Field:
    """Multiply each modal coefficient by sigma(k).

    ``sigma`` is called once with the integer wavenumber meshes (one
    argument per axis) and must return a broadcastable multiplier array.
    The input must be modal.
    """
    if f.space != MODAL:
        raise RepresentationError("apply_symbol requires a modal field")
    mult = np.asarray(sigma(*_k_meshes(f.grid)))
    return Field(f.grid, f.data * mult, MODAL)


def derivative_symbol(grid: TorusGrid, alpha: tuple):
    """Multiplier for the mixed derivative d^alpha: (i*pi/a)^|alpha| * k^alpha.

    Any odd component of ``alpha`` zeroes the Nyquist column of that axis.
    Returns an array ready to use with :func:`apply_symbol` via
    ``apply_symbol(f, lambda *k: sym)``.
    """
    if len(alpha) != grid.dim:
        raise RepresentationError(f"alpha must have {grid.dim} entries")
    ks = _k_meshes(grid)
    total = sum(alpha)
    sym = np.ones(grid.shape, dtype=np.complex128) * (1j * np.pi / grid.a) ** total
    for k, a_j in zip(ks, alpha):
        if a_j == 0:
            continue
        kk = k.copy()
        if a_j % 2 == 1:
            kk[k == -grid.n // 2] = 0.0
        sym = sym * kk**a_j
    return sym


def laplacian_symbol(grid: TorusGrid) -> np.ndarray:
    """Multiplier of the Laplacian: -(pi/a)^2 * sum_j k_j^2."""
    return -((np.pi / grid.a) ** 2) * _k_sq(grid)


def sobolev_norm(f: Field, s: float) -> float:
    """Spectral Sobolev norm ((2a)^d sum_k (1+|k|^(2s)) |c_k|^2)^(1/2).

    |k| is the 1-norm of the integer wavevector.  Multi-component fields
    contribute the root-sum-square over components.  s = 0 reduces the
    weight to 1 so the value equals the L2 norm (Parseval); for s > 0 the
    k = 0 weight is likewise 1 since |0|^(2s) = 0.
    """
    if s < 0:
        raise RepresentationError(f"s must be >= 0, got {s}")
    c = to_modal(f)
    if s == 0:
        w = 1.0
    else:
        w = 1.0 + _k_abs1(f.grid) ** (2.0 * s)
    total = np.sum(w * (c.data.real**2 + c.data.imag**2))
    return float(np.sqrt(f.grid.volume * total))


def quadrature_l2(f: Field) -> float:
    """Nodal-quadrature L2 norm (sum_i |u_i|^2 * cell_volume)^(1/2)."""
    u = to_nodal(f)
    total = np.sum(u.data.real**2 + u.data.imag**2)
    return float(np.sqrt(f.grid.cell_volume * total))


def dealias_23(f: Field) -> Field:
    """Zero all modes with any |k_j| > n/3 (2/3 rule)."""
    c = to_modal(f)
    keep = np.ones(f.grid.shape, dtype=bool)
    cut = f.grid.n / 3.0
    for k in _k_meshes(f.grid):
        keep &= np.abs(k) <= cut
    out = c.data * keep
    res = Field(f.grid, out, MODAL)
    return res if f.space == MODAL else to_nodal(res)


def modal_tail_fraction(f: Field) -> float:
    """Fraction of modal energy carried by modes with max_j |k_j| >= n/4."""
    c = to_modal(f)
    e = c.data.real**2 + c.data.imag**2
    tail = np.zeros(f.grid.shape, dtype=bool)
    for k in _k_meshes(f.grid):
        tail |= np.abs(k) >= f.grid.n / 4.0
    total = float(np.sum(e))
    if total == 0.0:
        return 0.0
    return float(np.sum(e * tail) / total)


# ---------------------------------------------------------------------------
# Snapshot file format
#
# Line 1 header:   splitstep-field 1 <dim> <a> <n> <m>
#   where <a> is repr() of the Python float (shortest round-trip form).
# Then m * n^dim data lines "re im", components in order, nodes in C order,
# floats again in repr() form.  Read back with float(), bit-exact.
# ---------------------------------------------------------------------------

_MAGIC = "splitstep-field"
_VERSION = 1


def write_field(f: Field, path) -> None:
    """Write nodal values as the documented delimited-text snapshot."""
    u = to_nodal(f)
    flat = u.data.reshape(u.m, -1)
    lines = [f"{_MAGIC} {_VERSION} {f.grid.dim} {f.grid.a!r} {f.grid.n} {u.m}"]
    for comp in flat:
        for z in comp:
            lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path) -> Field:
    """Read a snapshot written by :func:`write_field`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != _MAGIC or int(header[1]) != _VERSION:
            raise RepresentationError(f"{path}: not a field snapshot")
        dim, a, n, m = int(header[2]), float(header[3]), int(header[4]), int(header[5])
        grid = TorusGrid(dim, a, n)
        count = m * n**dim
        re = np.empty(count)
        im = np.empty(count)
        for i in range(count):
            parts = fh.readline().split()
            if len(parts) != 2:
                raise RepresentationError(f"{path}: truncated at data line {i}")
            re[i] = float(parts[0])
            im[i] = float(parts[1])
    data = (re + 1j * im).reshape((m,) + grid.shape)
    return Field(grid, data, NODAL)
