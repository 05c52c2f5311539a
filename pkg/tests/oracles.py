"""Independent reference computations for the test suite.

Nothing here calls into the package's solver paths: roots come from numpy's
companion-matrix eigenvalues plus Newton polish on the defining residual,
phase extrema from a scan plus golden-section refinement. Agreement between
these and the package is then evidence, not tautology.
"""

import math

import numpy as np

HBAR = 1.054571817e-34
C_VACUUM = 2.99792458e8


def scaled_roots_brute(g: float, delta: float):
    """Positive real roots of g^2 u^3 + 2 g delta u^2 + (1/4 + delta^2) u - 1/4.

    u is the photon number over the locking value, so physical roots sit in
    (0, 1]. Companion eigenvalues are polished with Newton steps on the
    residual to kill the eigensolver's last few digits of error.
    """
    if g == 0.0:
        return [0.25 / (0.25 + delta * delta)]
    coeffs = [g * g, 2.0 * g * delta, 0.25 + delta * delta, -0.25]
    roots = np.roots(coeffs)
    out = []
    for z in roots:
        if abs(z.imag) > 1e-6 * max(1.0, abs(z.real)):
            continue
        u = float(z.real)
        if u <= 0:
            continue
        for _ in range(60):
            f = ((g * g * u + 2.0 * g * delta) * u + 0.25 + delta * delta) * u - 0.25
            fp = 3.0 * g * g * u * u + 4.0 * g * delta * u + 0.25 + delta * delta
            if fp == 0:
                break
            step = f / fp
            u -= step
            if abs(step) <= 1e-17 * abs(u):
                break
        if u > 0:
            out.append(u)
    out.sort()
    # collapse near-double roots the eigensolver may split
    dedup = []
    for u in out:
        if not dedup or abs(u - dedup[-1]) > 1e-10 * max(abs(u), 1e-300):
            dedup.append(u)
    return dedup


def scaled_discriminant(g, delta):
    """Discriminant of the scaled cubic; > 0 means three distinct real roots."""
    g = np.asarray(g, dtype=float)
    delta = np.asarray(delta, dtype=float)
    a = g * g
    b = 2.0 * g * delta
    c = 0.25 + delta * delta
    d = -0.25
    return (
        18.0 * a * b * c * d
        - 4.0 * b**3 * d
        + b * b * c * c
        - 4.0 * a * c**3
        - 27.0 * a * a * d * d
    )


def golden_min(f, a: float, b: float, tol: float = 1e-12):
    """Golden-section minimum of a unimodal f on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def phase_extrema_scan(f, n_scan: int = 720):
    """Global min and max of a pi-periodic f(phi) via scan + refinement."""
    phis = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_scan, endpoint=False)
    vals = np.array([f(p) for p in phis])
    h = math.pi / n_scan
    i_min = int(np.argmin(vals))
    i_max = int(np.argmax(vals))
    _, vmin = golden_min(f, phis[i_min] - 2 * h, phis[i_min] + 2 * h)
    _, neg = golden_min(lambda p: -f(p), phis[i_max] - 2 * h, phis[i_max] + 2 * h)
    return vmin, -neg


def locked_closed_forms(sigma_tilde: float, kappa: float, gamma: float, eta: float):
    """Zero-frequency locked extrema straight from the closed expressions."""
    loss = kappa + gamma
    c = 4.0 * eta * kappa / loss
    root = math.sqrt(sigma_tilde * sigma_tilde + 0.25)
    v_s = 1.0 - 2.0 * c * (sigma_tilde * root - sigma_tilde * sigma_tilde)
    v_as = 1.0 + 2.0 * c * (sigma_tilde * root + sigma_tilde * sigma_tilde)
    return v_s, v_as


def synth_lineshape(rng, center, kappa, gamma, span, n, noise=0.01):
    """Transmission samples with multiplicative noise, as arrays."""
    freq = np.linspace(center - span / 2.0, center + span / 2.0, n)
    loss = kappa + gamma
    d = freq - center
    t = ((kappa - gamma) ** 2 / 4.0 + d * d) / (loss * loss / 4.0 + d * d)
    return freq, t * (1.0 + noise * rng.standard_normal(n))


def shifted_trace(g_sum, kappa, gamma, p_in, omega_p, freq):
    """Down-sweep transmission of the shifted resonance, computed directly.

    Single-root regime only (used below bistability onset): solve the cubic
    for N per grid point via the brute root finder and keep the lowest root,
    which is what a downward adiabatic sweep tracks there.
    """
    loss = kappa + gamma
    beta2 = p_in / (HBAR * omega_p)
    n_lock = 4.0 * kappa * beta2 / (loss * loss)
    out = []
    for dp in freq:
        if n_lock == 0.0:
            dcl = dp
        else:
            g = g_sum * n_lock / loss
            us = scaled_roots_brute(g, dp / loss)
            dcl = dp + g_sum * us[0] * n_lock
        out.append((((kappa - gamma) ** 2) / 4.0 + dcl * dcl)
                   / (loss * loss / 4.0 + dcl * dcl))
    return np.array(out)
