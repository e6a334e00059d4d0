import pytest

from mgconsensus.design import (
    DesignCertificate,
    consensus_set_check,
    convergence_bound,
    global_design,
    global_threshold,
    local_design,
    local_threshold,
    lyapunov,
)
from mgconsensus.errors import CriterionViolatedError

PHI = 0.0526  # per-channel persistency bound of the reference design


def test_global_threshold_and_design():
    thr = global_threshold(PHI, PHI, d_max=2)
    assert thr == pytest.approx(0.6312)
    eps, rate = global_design(PHI, PHI, 2)
    assert eps == pytest.approx(1.2624)
    assert rate == pytest.approx(1.01)


def test_global_design_strictness():
    eps, rate = global_design(PHI, PHI, 2, eps_margin=1.5, rate_margin=1.2)
    thr = global_threshold(PHI, PHI, 2)
    assert eps > thr
    assert rate > eps / (2.0 * (eps - thr))


def test_design_with_zero_bounds_needs_floor():
    eps, rate = global_design(0.0, 0.0, 2, eps_floor=0.1)
    assert eps == 0.1
    assert rate == pytest.approx(1.01 / 2.0)
    with pytest.raises(CriterionViolatedError):
        global_design(0.0, 0.0, 2)


def test_margin_validation():
    with pytest.raises(ValueError):
        global_design(PHI, PHI, 2, eps_margin=1.0)
    with pytest.raises(ValueError):
        local_design(PHI, PHI, PHI, 1, 1, rate_margin=0.99)


def test_local_threshold_formula():
    thr = local_threshold(0.1, 0.2, 0.05, d_i=2, d_j=3)
    assert thr == pytest.approx(2 * (0.1 + 0.1) + 3 * (0.2 + 0.1))


def test_local_matches_global_on_regular_uniform_inputs():
    thr_g = global_threshold(PHI, PHI, 2)
    thr_l = local_threshold(PHI, PHI, PHI, 2, 2)
    assert thr_l == pytest.approx(thr_g)
    eg, rg = global_design(PHI, PHI, 2)
    el, rl = local_design(PHI, PHI, PHI, 2, 2)
    assert (el, rl) == (pytest.approx(eg), pytest.approx(rg))


def test_convergence_bound_value():
    bound = convergence_bound(
        eps=1.2624, rate=1.01, d_max=2, d_min=2,
        phi_comm_max=PHI, phi_meas_max=PHI, phi_act_max=PHI, v0=1.0,
    )
    assert bound == pytest.approx(963.2762991128037, rel=1e-9)


def test_convergence_bound_scales_with_v0():
    args = dict(eps=1.2624, rate=1.01, d_max=2, d_min=2,
                phi_comm_max=PHI, phi_meas_max=PHI, phi_act_max=PHI)
    assert convergence_bound(v0=2.0, **args) == pytest.approx(
        2.0 * convergence_bound(v0=1.0, **args)
    )


def test_convergence_bound_rejects_unstable_design():
    with pytest.raises(CriterionViolatedError):
        convergence_bound(0.1, 1.0, 2, 2, 0.5, 0.5, 0.5, 1.0)


def test_consensus_set_check():
    ok, spread = consensus_set_check([1.0, 1.1, 1.2], eps=0.11)
    assert ok and spread == pytest.approx(0.2)
    ok, _ = consensus_set_check([0.0, 1.0], eps=0.5)
    assert not ok  # spread 1.0 not < 0.5 * (2 - 1)
    with pytest.raises(ValueError):
        consensus_set_check([1.0], eps=0.1)


def test_lyapunov():
    assert lyapunov([3.0, 3.0, 3.0]) == 0.0
    assert lyapunov([0.0, 2.0]) == pytest.approx(1.0)
    assert lyapunov([1.0, 2.0, 3.0]) == pytest.approx(1.0)


def test_certificate_serialisation():
    cert = DesignCertificate(
        mode="local",
        eps={(0, 1): 1.0},
        rate={(0, 1): 2.0},
        phi_meas={0: 0.1},
        phi_act={0: 0.2},
        phi_comm={(0, 1): 0.3},
        phi_meas_max=0.1,
        phi_act_max=0.2,
        phi_comm_max=0.3,
        delta=0.5,
        t_star_bound=12.0,
        v0=1.0,
        satisfied=True,
    )
    d = cert.to_dict()
    assert d["eps"] == {"0-1": 1.0}
    assert d["phi_communication"] == {"0-1": 0.3}
    assert d["satisfied"] is True
    assert d["phi_composite_meas_act"] == pytest.approx(0.5)
