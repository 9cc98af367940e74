"""Spectral calculus on uniform grids over [0, 1] and [0, 1]^2.

Each boundary condition is paired with the real transform that diagonalises
its Laplacian:

* periodic  -- FFT, nodes ``x_j = j/n``, eigenvalues ``4 pi^2 k^2``
* dirichlet -- DST-I, nodes ``x_j = j/(n+1)`` (interior), eigenvalues ``pi^2 k^2, k=1..n``
* neumann   -- DCT-II, midpoint nodes ``x_j = (j+1/2)/n``, eigenvalues ``pi^2 k^2, k=0..n-1``

All transforms use the orthonormal scaling, so grid and coefficient 2-norms
agree. Eigenvalues refer to ``-A`` and are therefore non-negative.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import InvalidArgumentError, InvalidSizeError


class BoundaryCondition(str, Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a real function on the grid belonging to ``bc``."""

    values: np.ndarray
    bc: BoundaryCondition

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (1, 2):
            raise InvalidSizeError(f"fields must be 1D or 2D, got ndim={values.ndim}")
        if values.ndim == 2 and values.shape[0] != values.shape[1]:
            raise InvalidSizeError(f"2D fields must be square, got {values.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bc", BoundaryCondition(self.bc))

    @property
    def dim(self):
        return self.values.ndim

    @property
    def n(self):
        return self.values.shape[0]

    def with_values(self, values):
        return GridField(values, self.bc)


def _check_size(n):
    if not isinstance(n, (int, np.integer)) or n < 4 or (n & (n - 1)) != 0:
        raise InvalidSizeError(f"grid size must be a power of two >= 4, got {n!r}")


def grid_nodes(n, bc):
    """Node coordinates along one axis."""
    bc = BoundaryCondition(bc)
    if bc is BoundaryCondition.PERIODIC:
        return np.arange(n) / n
    if bc is BoundaryCondition.DIRICHLET:
        return np.arange(1, n + 1) / (n + 1)
    return (np.arange(n) + 0.5) / n


def cell_size(n, bc):
    """Quadrature weight of one node (exact for the transform's modes)."""
    return 1.0 / (n + 1) if BoundaryCondition(bc) is BoundaryCondition.DIRICHLET else 1.0 / n


def mode_numbers(n, bc):
    """Integer mode index ``k`` of each coefficient slot along one axis.

    Periodic slots follow FFT order; the Nyquist slot is reported as ``+n/2``.
    """
    bc = BoundaryCondition(bc)
    if bc is BoundaryCondition.PERIODIC:
        k = np.fft.fftfreq(n, 1.0 / n).round().astype(int)
        k[n // 2] = n // 2
        return k
    if bc is BoundaryCondition.DIRICHLET:
        return np.arange(1, n + 1)
    return np.arange(n)


def _eigenvalues_1d(n, bc):
    k = mode_numbers(n, bc).astype(float)
    if BoundaryCondition(bc) is BoundaryCondition.PERIODIC:
        return 4.0 * np.pi**2 * k**2
    return np.pi**2 * k**2


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues of ``-A`` in the coefficient layout of the bc's transform."""

    n: int
    bc: BoundaryCondition
    dim: int
    eigenvalues: np.ndarray
    eigenvalues_1d: np.ndarray

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def nodes(self):
        return grid_nodes(self.n, self.bc)

    @property
    def cell(self):
        return cell_size(self.n, self.bc)

    def mesh(self):
        """Node coordinates as one array per axis (``indexing='ij'``)."""
        x = self.nodes
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def field(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape != self.shape:
            raise InvalidSizeError(f"expected shape {self.shape}, got {values.shape}")
        return GridField(values, self.bc)

    @cached_property
    def laplacian_matrix(self):
        """Dense ``A_n`` (1D only); assembled once and reused by dense steps."""
        if self.dim != 1:
            raise InvalidArgumentError("dense Laplacian is only cached for 1D spectra")
        eye = np.eye(self.n)
        return -_synthesize(_analyze(eye, self.bc, axes=(0,)) * self.eigenvalues[:, None],
                            self.bc, axes=(0,))


def build_spectrum(n, bc, dim=1):
    """Eigenvalues of ``-A`` for an ``n``-point grid per axis.

    >>> build_spectrum(4, "periodic").eigenvalues / (4 * np.pi**2)
    array([0., 1., 4., 1.])
    """
    _check_size(n)
    if dim not in (1, 2):
        raise InvalidArgumentError(f"dim must be 1 or 2, got {dim!r}")
    bc = BoundaryCondition(bc)
    lam = _eigenvalues_1d(int(n), bc)
    full = lam if dim == 1 else lam[:, None] + lam[None, :]
    lam.setflags(write=False)
    full.setflags(write=False)
    return Spectrum(int(n), bc, dim, full, lam)


# -- transforms ---------------------------------------------------------------

def _analyze(values, bc, axes):
    if bc is BoundaryCondition.PERIODIC:
        return sfft.fftn(values, axes=axes, norm="ortho")
    if bc is BoundaryCondition.DIRICHLET:
        return sfft.dstn(values, type=1, axes=axes, norm="ortho")
    return sfft.dctn(values, type=2, axes=axes, norm="ortho")


def _synthesize(coeffs, bc, axes):
    if bc is BoundaryCondition.PERIODIC:
        return sfft.ifftn(coeffs, axes=axes, norm="ortho").real
    if bc is BoundaryCondition.DIRICHLET:
        return sfft.idstn(coeffs, type=1, axes=axes, norm="ortho")
    return sfft.idctn(coeffs, type=2, axes=axes, norm="ortho")


def _all_axes(ndim):
    return tuple(range(ndim))


def forward_transform(f):
    """Orthonormal coefficients of ``f`` (complex for periodic fields)."""
    _check_size(f.n)
    return _analyze(f.values, f.bc, _all_axes(f.dim))


def inverse_transform(c, bc, n, dim=1):
    bc = BoundaryCondition(bc)
    _check_size(n)
    c = np.asarray(c)
    if c.shape != (n,) * dim:
        raise InvalidSizeError(f"coefficient shape {c.shape} does not match n={n}, dim={dim}")
    return GridField(_synthesize(c, bc, _all_axes(dim)), bc)


def _check_match(f, s):
    if f.bc is not s.bc:
        raise InvalidArgumentError(f"field bc {f.bc.value} does not match spectrum bc {s.bc.value}")
    if f.values.shape != s.shape:
        raise InvalidArgumentError(f"field shape {f.values.shape} does not match spectrum {s.shape}")


def _power(lam, gamma):
    if gamma == 0:
        return np.ones_like(lam)
    out = np.zeros_like(lam)
    pos = lam > 0
    out[pos] = lam[pos] ** gamma
    return out


def apply_operator_power(f, gamma, s):
    """``(-A)^gamma f`` by exponentiating eigenvalues; ``0^0 = 1``."""
    _check_match(f, s)
    if gamma < 0:
        raise InvalidArgumentError(f"gamma must be >= 0, got {gamma}")
    axes = _all_axes(s.dim)
    c = _analyze(f.values, s.bc, axes)
    return f.with_values(_synthesize(c * _power(s.eigenvalues, gamma), s.bc, axes))


def apply_laplacian(f, s):
    """``A f``; non-positive spectrum, so ``A sin(2 pi x) = -4 pi^2 sin(2 pi x)``."""
    g = apply_operator_power(f, 1.0, s)
    return f.with_values(-g.values)


# -- first derivatives ----------------------------------------------------------
# Periodic: multiplication by 2 pi i k (Nyquist slot zeroed).
# Neumann:  DCT-II coefficients -> DST-II coefficients on the same midpoints.
# Dirichlet: DST-I coefficients -> cosine series evaluated on the interior nodes.

def _periodic_wavenumbers(n):
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0
    return 2j * np.pi * k


def _shape_along(vec, ndim, axis):
    shape = [1] * ndim
    shape[axis] = vec.size
    return vec.reshape(shape)


def _derivative(values, bc, axis):
    n = values.shape[axis]
    nd = values.ndim
    if bc is BoundaryCondition.PERIODIC:
        c = sfft.fft(values, axis=axis, norm="ortho")
        c *= _shape_along(_periodic_wavenumbers(n), nd, axis)
        return sfft.ifft(c, axis=axis, norm="ortho").real
    if bc is BoundaryCondition.NEUMANN:
        c = sfft.dct(values, type=2, axis=axis, norm="ortho")
        k = _shape_along(np.pi * np.arange(1, n), nd, axis)
        s = np.zeros_like(c)
        dst_slots = [slice(None)] * nd
        dst_slots[axis] = slice(0, n - 1)
        dct_slots = [slice(None)] * nd
        dct_slots[axis] = slice(1, n)
        s[tuple(dst_slots)] = -k * c[tuple(dct_slots)]
        return sfft.idst(s, type=2, axis=axis, norm="ortho")
    inner = [slice(None)] * nd
    inner[axis] = slice(1, n + 1)
    return _dirichlet_cosine_values(values, axis)[tuple(inner)]


def _dirichlet_cosine_values(values, axis):
    """Cosine-series derivative of a DST-I field at nodes ``j/(n+1), j=0..n+1``."""
    n = values.shape[axis]
    nd = values.ndim
    s = sfft.dst(values, type=1, axis=axis, norm="ortho")
    k = _shape_along(np.pi * np.arange(1, n + 1), nd, axis)
    pad = [(0, 0)] * nd
    pad[axis] = (1, 1)
    # scipy's DCT-I doubles the interior terms
    return sfft.dct(np.pad(s * k * np.sqrt(2.0 / (n + 1)) / 2.0, pad), type=1, axis=axis)


def _dirichlet_cosine_values_adjoint(y, axis):
    n = y.shape[axis] - 2
    nd = y.ndim
    c = np.full(n + 2, 2.0)
    c[0] = c[-1] = 1.0
    c = _shape_along(c, nd, axis)
    inner = [slice(None)] * nd
    inner[axis] = slice(1, n + 1)
    m = (c * sfft.dct(y / c, type=1, axis=axis))[tuple(inner)]
    k = _shape_along(np.pi * np.arange(1, n + 1), nd, axis)
    return sfft.dst(m * k * np.sqrt(2.0 / (n + 1)) / 2.0, type=1, axis=axis, norm="ortho")


def _derivative_adjoint(values, bc, axis):
    """Transpose of ``_derivative`` along ``axis`` (periodic and Neumann)."""
    n = values.shape[axis]
    nd = values.ndim
    if bc is BoundaryCondition.PERIODIC:
        return -_derivative(values, bc, axis)
    s = sfft.dst(values, type=2, axis=axis, norm="ortho")
    k = _shape_along(np.pi * np.arange(1, n), nd, axis)
    c = np.zeros_like(s)
    dst_slots = [slice(None)] * nd
    dst_slots[axis] = slice(0, n - 1)
    dct_slots = [slice(None)] * nd
    dct_slots[axis] = slice(1, n)
    c[tuple(dct_slots)] = -k * s[tuple(dst_slots)]
    return sfft.idct(c, type=2, axis=axis, norm="ortho")


def spectral_gradient(f, s):
    """First derivative along each axis, one GridField per axis.

    The derivative of a Neumann field lives in the sine basis and that of a
    Dirichlet field in the cosine basis; the returned fields keep the input's
    bc tag because they share its nodes.
    """
    _check_match(f, s)
    return tuple(f.with_values(_derivative(f.values, s.bc, ax)) for ax in range(s.dim))


def divergence_form(v, a, s):
    """``div(a grad v)`` as ``-G^T diag(a) G v``.

    Symmetric and non-positive for ``a > 0``; equals ``A`` when ``a = 1``
    (up to the periodic Nyquist mode, which the first derivative drops). The
    range has zero mean for periodic and Neumann fields, so implicit steps
    conserve the mean exactly. For Dirichlet fields the derivative is taken
    on the closed node set ``j/(n+1), j=0..n+1`` with trapezoid weights;
    ``a`` is extended by 1 at the boundary nodes, where ``(-A)^gamma v``
    vanishes.
    """
    _check_match(v, s)
    a = a.values if isinstance(a, GridField) else np.asarray(a, dtype=float)
    if a.shape != s.shape:
        raise InvalidArgumentError(f"coefficient shape {a.shape} does not match {s.shape}")
    out = np.zeros(s.shape)
    for ax in range(s.dim):
        if s.bc is BoundaryCondition.DIRICHLET:
            pad = [(0, 0)] * s.dim
            pad[ax] = (1, 1)
            # trapezoid weight 1/2 at the closing nodes, where a = 1
            a_ext = np.pad(a, pad, constant_values=0.5)
            flux = a_ext * _dirichlet_cosine_values(v.values, ax)
            out -= _dirichlet_cosine_values_adjoint(flux, ax)
        else:
            out -= _derivative_adjoint(a * _derivative(v.values, s.bc, ax), s.bc, ax)
    return v.with_values(out)
