"""Per-mode coefficients of the two-scale exponential time stepper.

For one Fourier mode with frequency mu and parameters (tau, eps), write

    sigma   = sqrt(1 + eps^2 mu^2),      omega   = sigma / eps^2,
    lam_+   = -(1 + sigma) / eps^2,      lam_-   = (sigma - 1) / eps^2 ,

so that exp(i t lam_+-) are the two oscillatory characteristic solutions of the
filtered envelope equation  eps^2 w'' + 2 i w' + mu^2 w = 0.  The stepper needs

    a(tau)  = [lam_+ e^{i tau lam_-} - lam_- e^{i tau lam_+}] / (lam_+ - lam_-)
    a'(tau) =  i lam_+ lam_- [e^{i tau lam_-} - e^{i tau lam_+}] / (lam_+ - lam_-)
    b(tau)  =  i [e^{i tau lam_+} - e^{i tau lam_-}] / (eps^2 (lam_- - lam_+))
    b'(tau) =  [lam_+ e^{i tau lam_+} - lam_- e^{i tau lam_-}] / (eps^2 (lam_+ - lam_-))
    c(tau)  =  int_0^tau b(s)  ds
    c'(tau) =  int_0^tau b'(s) ds                       ( = b(tau), an identity )
    p(tau)  =  int_0^tau sin(omega (tau-s)) / (eps^2 omega) * e^{3 i s/eps^2} ds
    p'(tau) =  int_0^tau cos(omega (tau-s)) / eps^2      * e^{3 i s/eps^2} ds

Every quantity reduces to trigonometric functions of (omega tau) and the entire
function

    phi(i theta) := (e^{i theta} - 1)/(i theta) = e^{i theta/2} * sinc(theta/2),

which is evaluated through its half-angle form: it is bounded, branch-free, and
suffers no cancellation for any real theta, so no small-argument series or
resonance special case is required.  Closed forms used below:

    a(tau)  = e^{-i tau/eps^2} [cos(omega tau) + i sin(omega tau)/sigma]
    a'(tau) = -mu^2 b(tau)
    b(tau)  = e^{-i tau/eps^2} sin(omega tau)/sigma
    b'(tau) = e^{-i tau/eps^2} [cos(omega tau) - i sin(omega tau)/sigma] / eps^2
    c(tau)  = (i tau / 2 sigma) [phi(i tau lam_+) - phi(i tau lam_-)]
    p(tau)  = -(i tau / 2 sigma) [e^{i omega tau} phi(i tau alf_-) -
                                  e^{-i omega tau} phi(i tau alf_+)]
    p'(tau) = (tau / 2 eps^2)   [e^{i omega tau} phi(i tau alf_-) +
                                  e^{-i omega tau} phi(i tau alf_+)]

with alf_-+ = (3 -+ sigma)/eps^2.  Phase arguments like tau*omega are formed
with a compensated (two-product) multiplication so that the phase carried into
sin/cos is accurate to ~1 ulp of the exact product even when it is ~1e4 rad.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kgmti.spectral import SpectralGrid

__all__ = ["ModeCoeffs", "CoeffTable", "eval_mode_coeffs", "build_coeff_table", "cis"]

_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitting constant for binary64


def _two_prod(x, y):
    """Return (p, e) with p = fl(x*y) and p + e = x*y exactly."""
    p = x * y
    cx = _SPLIT * x
    hx = cx - (cx - x)
    lx = x - hx
    cy = _SPLIT * y
    hy = cy - (cy - y)
    ly = y - hy
    e = ((hx * hy - p) + hx * ly + lx * hy) + lx * ly
    return p, e


def cis(x, y):
    """exp(i*x*y) with the phase x*y formed by a compensated product."""
    p, e = _two_prod(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.exp(1j * p)
    return out + out * (1j * e)


def _sinc(x):
    """sin(x)/x with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0.0
    out[nz] = np.sin(x[nz]) / x[nz]
    return out


def _phi_of_product(x, y):
    """phi(i*x*y) = e^{i x y/2} sinc(x y/2), with a compensated product x*y."""
    p, e = _two_prod(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    half, ehalf = 0.5 * p, 0.5 * e
    rot = np.exp(1j * half)
    rot = rot + rot * (1j * ehalf)
    return rot * _sinc(half + ehalf)


def _eval_arrays(tau: float, eps: float, mu_sq: np.ndarray) -> dict:
    """All coefficient arrays for one (tau, eps) over an array of mu^2."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if tau < 0.0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    eps2 = eps * eps
    sigma = np.sqrt(1.0 + eps2 * mu_sq)
    omega = sigma / eps2
    lam_p = -(1.0 + sigma) / eps2
    lam_m = mu_sq / (1.0 + sigma)  # == (sigma-1)/eps^2, cancellation-free

    rot = complex(cis(tau, 1.0 / eps2))  # e^{+i tau/eps^2}, mode-independent
    crot = np.conj(rot)

    cw = cis(tau, omega)  # e^{i omega tau}
    cos_wt, sin_wt = cw.real, cw.imag
    s_sig = sin_wt / sigma

    phi_p = _phi_of_product(tau, lam_p)
    phi_m = _phi_of_product(tau, lam_m)
    alf_m = (3.0 - sigma) / eps2
    alf_p = (3.0 + sigma) / eps2
    phi_am = _phi_of_product(tau, alf_m)
    phi_ap = _phi_of_product(tau, alf_p)

    a = crot * (cos_wt + 1j * s_sig)
    b = crot * s_sig
    a_prime = -mu_sq * b
    b_prime = crot * (cos_wt - 1j * s_sig) / eps2
    c = (0.5j * tau / sigma) * (phi_p - phi_m)
    c_prime = b  # int_0^tau b'(s) ds = b(tau) - b(0) and b(0) = 0
    p = (-0.5j * tau / sigma) * (cw * phi_am - np.conj(cw) * phi_ap)
    p_prime = (0.5 * tau / eps2) * (cw * phi_am + np.conj(cw) * phi_ap)

    return {
        "omega": omega,
        "lambda_plus": lam_p,
        "lambda_minus": lam_m,
        "a": a,
        "a_prime": a_prime,
        "b": b,
        "b_prime": b_prime,
        "c": c,
        "c_prime": c_prime,
        "p": p,
        "p_prime": p_prime,
        "rot": rot,
    }


@dataclass(frozen=True)
class ModeCoeffs:
    """Coefficients of a single mode (scalar mu) at one (tau, eps)."""

    omega: float
    lambda_plus: float
    lambda_minus: float
    a: complex
    a_prime: complex
    b: complex
    b_prime: complex
    c: complex
    c_prime: complex
    p: complex
    p_prime: complex


def eval_mode_coeffs(tau: float, eps: float, mu: float) -> ModeCoeffs:
    """Evaluate all coefficients for one mode.

    Raises ValueError for eps <= 0 or tau < 0.
    """
    d = _eval_arrays(float(tau), float(eps), np.asarray(float(mu)) ** 2)
    return ModeCoeffs(
        omega=float(d["omega"]),
        lambda_plus=float(d["lambda_plus"]),
        lambda_minus=float(d["lambda_minus"]),
        a=complex(d["a"]),
        a_prime=complex(d["a_prime"]),
        b=complex(d["b"]),
        b_prime=complex(d["b_prime"]),
        c=complex(d["c"]),
        c_prime=complex(d["c_prime"]),
        p=complex(d["p"]),
        p_prime=complex(d["p_prime"]),
    )


@dataclass(frozen=True)
class CoeffTable:
    """Coefficient arrays over all modes of a grid, for one (tau, eps).

    rot = e^{+i tau/eps^2} is the carrier-phase increment per step; arrays are
    laid out like the grid's FFT spectra.  With zero_nyquist the l = -N/2
    column is annihilated, so stepping keeps real fields in the symmetric,
    Nyquist-free subspace.
    """

    tau: float
    eps: float
    rot: complex
    omega: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    c: np.ndarray
    c_prime: np.ndarray
    p: np.ndarray
    p_prime: np.ndarray
    nyquist_zeroed: bool


def build_coeff_table(
    tau: float, eps: float, grid: SpectralGrid, zero_nyquist: bool = True
) -> CoeffTable:
    """Tabulate all mode coefficients on a grid for step size tau."""
    d = _eval_arrays(float(tau), float(eps), grid.mu_sq)
    rot = d.pop("rot")
    if zero_nyquist:
        mask = grid.nyquist_mask
        for key in ("a", "a_prime", "b", "b_prime", "c", "c_prime", "p", "p_prime"):
            arr = d[key] + 0j  # ensure complex, own the buffer
            arr[mask] = 0.0
            d[key] = arr
    return CoeffTable(tau=float(tau), eps=float(eps), rot=rot, nyquist_zeroed=zero_nyquist, **d)
