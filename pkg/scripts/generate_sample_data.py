#!/usr/bin/env python3
"""Regenerate the synthetic measurement files in sample_data/.

All files are deterministic (no RNG) so reruns are byte-identical. The
zero-span pair encodes a phase-swept locked variance whose percentile
reduction lands near -1.2 dB / +6.9 dB; the transmission trace is a clean
lineshape for the resonance fitter; the resonance ladder carries a small
quadratic dispersion.
"""

import math
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "sample_data"

C_VACUUM = 2.99792458e8


def fmt(x):
    return repr(float(x))


def write(name, lines):
    path = OUT / name
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(lines)} lines)")


def transmission_trace():
    kappa, gamma = 515e6, 192e6
    center = -2.35e8
    loss = kappa + gamma
    lines = ["# p_in_w=1e-06", "# direction=down", "delta_p_rad_s,transmission"]
    n = 201
    for i in range(n):
        d = -5e9 + 1e10 * i / (n - 1)
        dc = d - center
        t = ((kappa - gamma) ** 2 / 4.0 + dc * dc) / (loss * loss / 4.0 + dc * dc)
        lines.append(f"{fmt(d)},{fmt(t)}")
    write("transmission_trace.csv", lines)


def resonances():
    om0 = 2.0 * math.pi * C_VACUUM / 1550e-9
    d1, d2 = 0.68e12, 7.76e6
    lines = ["mu,omega_rad_s"]
    for mu in range(-40, 41, 4):
        lines.append(f"{mu},{fmt(om0 + d1 * mu + 0.5 * d2 * mu * mu)}")
    write("resonances.csv", lines)


def zero_span():
    # locked variance vs LO phase, coefficients chosen so the percentile
    # reduction reproduces the -1.219 dB / +6.89 dB pair
    st = 0.9335276066305648
    c = 1.0447215221867825
    y = 1.0
    ref_dbm = -60.0
    meta = ["# center_hz=100000000.0", "# rbw_hz=300000.0", "# vbw_hz=300.0"]
    n = 8000
    dt = 5e-05
    trace = list(meta) + ["t_s,power_dbm"]
    ref = list(meta) + ["t_s,power_dbm"]
    for i in range(n):
        t = i * dt
        phi = 2.0 * math.pi * i / n
        z = (0.5j * st) * (y + 2j * st) * complex(math.cos(-2 * phi), math.sin(-2 * phi))
        v = 1.0 + (c / (y * y)) * (2.0 * z.real + 2.0 * st * st)
        trace.append(f"{fmt(t)},{fmt(ref_dbm + 10.0 * math.log10(v))}")
        ref.append(f"{fmt(t)},{fmt(ref_dbm)}")
    write("zero_span_trace.csv", trace)
    write("zero_span_reference.csv", ref)


if __name__ == "__main__":
    transmission_trace()
    resonances()
    zero_span()
