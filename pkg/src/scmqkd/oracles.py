"""Independent reference evaluators used by the verification suite.

These deliberately avoid the production code path: the closed-form key
rate is written in the usual GMCS arrangement and evaluated in 50-digit
arithmetic, and the covariance-matrix route computes symplectic spectra
numerically from the full Gaussian state.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import integrate


def gmcs_key_rate(va, beta, transmittance, excess_noise, eta, v_el, eps_s=0.0, dps=50):
    """Single-channel homodyne GMCS key rate (bits/pulse), reverse reconciliation."""
    with mpmath.workdps(dps):
        mp = mpmath.mpf
        V = mp(va) + 1 + mp(eps_s)
        T = mp(transmittance)
        chi_line = 1 / T - 1 + mp(excess_noise)
        chi_h = (1 - mp(eta)) / mp(eta) + mp(v_el) / mp(eta)
        chi_tot = chi_line + chi_h / T
        # eps_s enters Bob's conditional variance as extra source noise
        i_ab = mpmath.log((V + chi_tot) / (1 + mp(eps_s) + chi_tot), 2) / 2

        A = V ** 2 * (1 - 2 * T) + 2 * T + T ** 2 * (V + chi_line) ** 2
        B = T ** 2 * (V * chi_line + 1) ** 2
        C = (V * mpmath.sqrt(B) + T * (V + chi_line) + A * chi_h) / (T * (V + chi_tot))
        D = mpmath.sqrt(B) * (V + mpmath.sqrt(B) * chi_h) / (T * (V + chi_tot))

        def nu(a, b, sign):
            return mpmath.sqrt((a + sign * mpmath.sqrt(a * a - 4 * b)) / 2)

        def g(v):
            if v <= 1:
                return mp(0)
            return ((v + 1) / 2) * mpmath.log((v + 1) / 2, 2) - ((v - 1) / 2) * mpmath.log((v - 1) / 2, 2)

        s_be = g(nu(A, B, 1)) + g(nu(A, B, -1)) - g(nu(C, D, 1)) - g(nu(C, D, -1))
        return float(mp(beta) * i_ab - s_be)


def _omega(n_modes):
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_spectrum(gamma):
    """Symplectic eigenvalues via the spectrum of i * Omega * gamma."""
    n = gamma.shape[0] // 2
    ev = np.sort(np.abs(np.linalg.eigvals(1j * _omega(n) @ gamma)))
    return ev[::2]


def _entropy(gamma):
    total = 0.0
    for v in symplectic_spectrum(gamma):
        if v > 1 + 1e-12:
            total += ((v + 1) / 2) * math.log2((v + 1) / 2) - ((v - 1) / 2) * math.log2((v - 1) / 2)
    return total


def covariance_key_rate(va, beta, transmittance, excess_noise, eta, v_el, eps_s=0.0):
    """Key rate from explicit covariance matrices of the entanglement-based picture.

    Bob's detector is a beam splitter of transmission eta fed by one arm of an
    EPR pair of variance v; the conditional state follows from an ideal homodyne
    measurement of Bob's X quadrature.
    """
    V = va + 1.0 + eps_s
    T = transmittance
    chi_line = 1.0 / T - 1.0 + excess_noise
    I2, Z = np.eye(2), np.diag([1.0, -1.0])

    vb = T * (V + chi_line)
    c = math.sqrt(T * (V * V - 1.0))
    gamma_ab = np.block([[V * I2, c * Z], [c * Z, vb * I2]])

    chi_tot = chi_line + ((1.0 - eta + v_el) / eta) / T
    i_ab = 0.5 * math.log2((V + chi_tot) / (1.0 + eps_s + chi_tot))
    s_e = _entropy(gamma_ab)

    if eta < 1.0:
        v = (1.0 - eta + v_el) / (1.0 - eta)
        epr = math.sqrt(v * v - 1.0)
        # mode order: A, B, F0, G  (F0 enters the beam splitter with B)
        g = np.zeros((8, 8))
        g[0:4, 0:4] = gamma_ab
        g[4:8, 4:8] = np.block([[v * I2, epr * Z], [epr * Z, v * I2]])
        t, r = math.sqrt(eta), math.sqrt(1.0 - eta)
        S = np.eye(8)
        S[2:6, 2:6] = np.block([[t * I2, r * I2], [-r * I2, t * I2]])
        g = S @ g @ S.T
        keep = [0, 1, 4, 5, 6, 7]
        meas = [2, 3]
    else:
        if v_el != 0.0:
            raise ValueError("covariance oracle models electronic noise only for eta < 1")
        g = gamma_ab
        keep = [0, 1]
        meas = [2, 3]

    g_rest = g[np.ix_(keep, keep)]
    g_cross = g[np.ix_(keep, meas)]
    g_b = g[np.ix_(meas, meas)]
    pi_x = np.diag([1.0, 0.0])
    g_cond = g_rest - g_cross @ pi_x @ g_cross.T / g_b[0, 0]
    s_cond = _entropy(g_cond)
    return beta * i_ab - (s_e - s_cond)


def k0_integral(x: float) -> float:
    """K0 from its integral form, int_0^inf exp(-x cosh t) dt."""
    # beyond t_max the integrand is below exp(-745), i.e. zero in double precision
    t_max = math.acosh(max(745.0 / x, 1.0))
    val, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)), 0.0, t_max,
                            epsabs=0.0, epsrel=1e-13, limit=500)
    return val


def m2_by_loops(n: int, k: int) -> int:
    """Double-loop enumeration over all signed index pairs."""
    idx = [i for i in range(-n, n + 1) if i != 0]
    return sum(1 for r in idx for s in idx if r + s == k)
