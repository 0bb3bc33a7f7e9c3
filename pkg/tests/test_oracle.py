import math

import numpy as np

from bangbang.control import QaoaAngles
from bangbang.landscape import BushCost, make_spike
from bangbang.oracle import (
    check_classical,
    check_mixer_hamming,
    check_mixer_lambda,
    check_qaoa,
    full_qaoa,
    project,
    full_costs,
    run_oracle_suite,
)


def test_mixer_projections():
    assert check_mixer_hamming(2).passed
    assert check_mixer_lambda(2, 1.0).passed
    assert check_mixer_lambda(5, 1 / 6).passed


def test_single_qubit_rotation_convention():
    # ramp protocol on one qubit lands exactly on |0>
    psi = full_qaoa(np.array([0.0, 1.0]), 1, QaoaAngles((math.pi / 4,), (math.pi / 2,)))
    assert abs(psi[0]) ** 2 > 1 - 1e-15


def test_projection_keeps_symmetric_states():
    c = make_spike(8, 0.5, 0.5)
    psi = full_qaoa(full_costs(c), 8, QaoaAngles((0.3, 0.8), (1.1, -0.4)))
    assert abs(np.sum(np.abs(project(psi, c)) ** 2) - 1) < 1e-12


def test_bush_checks():
    for chk in check_classical(BushCost(4)):
        assert chk.passed, chk
    assert check_qaoa(BushCost(4), QaoaAngles((0.4,), (1.3,)), lam=1.0).passed


def test_small_suite_passes():
    checks = run_oracle_suite(seed=5, n_random=4, max_n=7)
    assert len(checks) > 40
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
