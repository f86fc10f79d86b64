"""Periodic Fourier collocation grids and the discrete operators built on them.

Conventions used throughout the package (1D; 2D is the tensor product):

* grid nodes       x_j = a + j*h,  h = (b-a)/N,  j = 0..N-1  (x_N identified with x_0)
* frequencies      mu_l = 2*pi*l/(b-a),  l in {-N/2, ..., N/2-1}
* forward DFT      f~_l = (1/N) * sum_j f_j * exp(-i*mu_l*(x_j-a))
* inverse DFT      f_j  = sum_l f~_l * exp(+i*mu_l*(x_j-a))
* discrete H^1     ||f||_H1 = sqrt( (b-a)^dim * sum_l (1+|mu_l|^2) |f~_l|^2 )
* discrete energy  E = h^dim * sum_j [ eps^2|udot_j|^2 + |grad u_j|^2
                                       + |u_j|^2/eps^2 + (lam/2)|u_j|^4 ]

Arrays are stored in-memory in the standard FFT layout (l = 0..N/2-1, -N/2..-1),
which is the same index set in a different order; nothing downstream depends on
the ordering, only on mu_l.  The Nyquist mode l = -N/2 is zeroed in odd-order
derivatives and when re-symmetrizing real fields (it has no conjugate partner).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["SpectralGrid", "energy"]


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic collocation grid on (a, b), dim 1 or 2 (square in 2D).

    Parameters
    ----------
    a, b : float
        Domain endpoints, b > a.
    n : int
        Even number of collocation points per dimension.
    dim : int
        1 or 2.
    """

    a: float
    b: float
    n: int
    dim: int = 1

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"domain endpoints must satisfy b > a, got ({self.a}, {self.b})")
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"n must be a positive even integer, got {self.n}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")

    # ---------------------------------------------------------------- geometry

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def measure(self) -> float:
        """Lebesgue measure of the domain, (b-a)^dim."""
        return self.length**self.dim

    @cached_property
    def x(self) -> np.ndarray:
        """1D node coordinates a + j*h (per axis; same for both axes in 2D)."""
        return self.a + self.h * np.arange(self.n)

    def mesh(self):
        """Node coordinate arrays broadcastable to field shape.

        Returns (x,) in 1D and (X, Y) with X varying along axis 0 in 2D.
        """
        if self.dim == 1:
            return (self.x,)
        return (self.x[:, None], self.x[None, :])

    @cached_property
    def mu(self) -> np.ndarray:
        """Frequencies mu_l in FFT layout (one axis)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def mu_sq(self) -> np.ndarray:
        """|mu_l|^2 broadcast to the field shape (mu_x^2 + mu_y^2 in 2D)."""
        if self.dim == 1:
            return self.mu**2
        return self.mu[:, None] ** 2 + self.mu[None, :] ** 2

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """Boolean mask, True on every entry touching the l = -N/2 mode."""
        one = np.zeros(self.n, dtype=bool)
        one[self.n // 2] = True
        if self.dim == 1:
            return one
        return one[:, None] | one[None, :]

    @cached_property
    def _reflect_idx(self) -> np.ndarray:
        # index permutation realizing l -> -l (mod N) along one axis
        return (-np.arange(self.n)) % self.n

    # --------------------------------------------------------------- transforms

    def _check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid shape {self.shape}")
        return f

    def forward(self, f: np.ndarray) -> np.ndarray:
        """Discrete Fourier coefficients f~_l = (1/N^dim) sum_j f_j e^{-i mu_l (x_j-a)}."""
        f = self._check(f)
        return np.fft.fftn(f) / self.n**self.dim

    def inverse(self, coef: np.ndarray) -> np.ndarray:
        """Evaluate sum_l f~_l e^{+i mu_l (x_j-a)} at the nodes (complex result)."""
        coef = self._check(coef)
        return np.fft.ifftn(coef) * self.n**self.dim

    def reflect_spectrum(self, coef: np.ndarray) -> np.ndarray:
        """Coefficients re-indexed by l -> -l (mod N); conj of this is the
        spectrum of the conjugated field: F(conj f)_l = conj(F(f)_{-l})."""
        coef = self._check(coef)
        if self.dim == 1:
            return coef[self._reflect_idx]
        return coef[np.ix_(self._reflect_idx, self._reflect_idx)]

    # ---------------------------------------------------------------- operators

    def derivative(self, f: np.ndarray, axis: int = 0) -> np.ndarray:
        """Spectral first derivative along one axis (Nyquist mode zeroed)."""
        f = self._check(f)
        coef = np.fft.fftn(f)
        mult = 1j * self.mu
        mult[self.n // 2] = 0.0
        shape = [1] * self.dim
        shape[axis] = self.n
        out = np.fft.ifftn(coef * mult.reshape(shape))
        return out.real if np.isrealobj(f) else out

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Spectral Laplacian (even order: Nyquist mode kept)."""
        f = self._check(f)
        out = np.fft.ifftn(np.fft.fftn(f) * (-self.mu_sq))
        return out.real if np.isrealobj(f) else out

    def resymmetrize(self, f: np.ndarray) -> np.ndarray:
        """Project a nominally real field onto the real, Nyquist-free subspace."""
        coef = self.forward(f)
        coef[self.nyquist_mask] = 0.0
        return self.inverse(coef).real

    # -------------------------------------------------------------------- norms

    def l2_norm(self, f: np.ndarray) -> float:
        """sqrt( (b-a)^dim * sum_l |f~_l|^2 )  (= continuous L2 norm of the interpolant)."""
        coef = self.forward(f)
        return float(np.sqrt(self.measure * np.sum(np.abs(coef) ** 2)))

    def h1_norm(self, f: np.ndarray) -> float:
        """sqrt( (b-a)^dim * sum_l (1+|mu_l|^2) |f~_l|^2 )."""
        coef = self.forward(f)
        return float(np.sqrt(self.measure * np.sum((1.0 + self.mu_sq) * np.abs(coef) ** 2)))


def energy(u: np.ndarray, udot: np.ndarray, eps: float, lam: float, grid: SpectralGrid) -> float:
    """Discrete energy of a real state (conserved by the continuous flow).

    E = h^dim * sum_j [ eps^2 |udot_j|^2 + |grad u_j|^2 + |u_j|^2/eps^2
                        + (lam/2) |u_j|^4 ],
    with the gradient evaluated spectrally.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    u = grid._check(u)
    udot = grid._check(udot)
    grad_sq = np.zeros_like(u, dtype=float)
    for axis in range(grid.dim):
        du = grid.derivative(u, axis=axis)
        grad_sq += du.real**2 + du.imag**2 if np.iscomplexobj(du) else du**2
    dens = (
        eps**2 * np.abs(udot) ** 2
        + grad_sq
        + np.abs(u) ** 2 / eps**2
        + 0.5 * lam * np.abs(u) ** 4
    )
    return float(grid.h**grid.dim * np.sum(dens))
