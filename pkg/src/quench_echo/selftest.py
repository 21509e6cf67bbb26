"""Oracle-equivalence checks runnable from the command line.

Each check pairs two independent routes to the same number. The instances
are deliberately small so the whole set finishes in a few seconds.
"""

from __future__ import annotations

import time

import numpy as np

from .aa import AAParams, aa_ground_state, build_aa_hamiltonian
from .echo import overlap_distribution, spectral_average, time_average_echo
from .fidelity import chi_delta_numeric, haldane_echo_closure, haldane_susceptibilities
from .haldane import HaldaneParams
from .ising import ising_rate_closed, ising_rate_discrete
from .linalg import eig_hermitian


def check_time_average():
    p = AAParams(16, 0.0)
    dist = overlap_distribution(eig_hermitian(build_aa_hamiltonian(p.with_delta(1.0))), aa_ground_state(p))
    tau = 2e4
    ta = time_average_echo(dist, tau, int(10 * tau * np.max(np.abs(dist.energies))) + 1)
    sa = spectral_average(dist)
    return abs(ta - sa) <= 1e-2, f"time average {ta:.6f} vs spectral {sa:.6f}"


def check_ising_limit():
    d = ising_rate_discrete(0.0, 2.0, 1000)
    c = ising_rate_closed(0.0, 2.0, 4096)
    return abs(d - c) <= 1e-3, f"discrete {d:.8f} vs closed form {c:.8f}"


def check_fidelity_identity():
    worst = 0.0
    for M in (1.0, 2.0, 3.0, 4.0):
        p = HaldaneParams(M=M, N=32)
        four_chi_f = 4.0 * haldane_susceptibilities(p, "M")[1]
        chi_d = chi_delta_numeric(haldane_echo_closure(p, "M"), M, 1e-5)
        worst = max(worst, abs(chi_d - four_chi_f) / four_chi_f)
    return worst <= 1e-3, f"max relative deviation {worst:.2e}"


CHECKS = {
    "time-average vs spectral average (AA, L=16)": check_time_average,
    "discrete vs closed-form Ising rate (L=1000)": check_ising_limit,
    "chi_delta vs 4 chi_F (Haldane M-quench, N=32)": check_fidelity_identity,
}


def run(stream) -> bool:
    ok = True
    for name, check in CHECKS.items():
        t0 = time.perf_counter()
        passed, detail = check()
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail} ({time.perf_counter() - t0:.2f} s)", file=stream)
    return ok
