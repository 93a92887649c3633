import numpy as np
import pytest
from numpy.testing import assert_allclose

from rtd1d.constants import EV_PER_JOULE
from rtd1d.core import (
    BiasSchedule,
    DeviceGeometry,
    Grids,
    PhysicalParams,
    dispersion,
    doping_profile,
    external_potential,
    filled_potential,
    injection_profile,
)

PARAMS = PhysicalParams()
GEOM = DeviceGeometry()


def test_default_material_values():
    assert_allclose(PARAMS.EF, 6.7097e-21 * EV_PER_JOULE)
    assert_allclose(PARAMS.EF, 0.041879, atol=1e-6)
    assert PARAMS.T == 300.0
    assert_allclose(PARAMS.m / 5.685630103, 0.067, rtol=1e-9)
    # cutoff formula sqrt(2m(EF + 7kBT))/hbar
    assert_allclose(PARAMS.default_kM(), 0.6260, atol=5e-4)


def test_positivity_enforced():
    with pytest.raises(ValueError):
        PhysicalParams(T=-1.0)


def test_geometry_ordering_rejected():
    with pytest.raises(ValueError, match="a1 < a2 < a3"):
        DeviceGeometry(a2=66.0, a3=65.0)
    with pytest.raises(ValueError, match="nD1 > nD2"):
        DeviceGeometry(nD1=1e-6, nD2=1e-3)


def test_external_potential_regions():
    x = np.array([10.0, 45.0, (GEOM.a1 + GEOM.b1) / 2, 100.0, 130.0])
    U = external_potential(GEOM, 0.1, x)
    assert U[0] == 0.0 and U[1] == 0.0            # left of a1
    assert_allclose(U[2], -0.05)                  # ramp midpoint, barriers cancel
    assert_allclose(U[3], -0.1)                   # beyond b1
    assert_allclose(U[4], -0.1)
    U0 = external_potential(GEOM, 0.0, np.array([62.0, 67.0, 72.0]))
    assert_allclose(U0, [GEOM.v0, 0.0, GEOM.v0])  # barrier / well / barrier


def test_filled_identity_pointwise():
    x = np.linspace(0, GEOM.L, 301)
    well = np.where((x >= GEOM.a3) & (x <= GEOM.b3), GEOM.v0, 0.0)
    for B in (0.0, 0.07):
        assert np.array_equal(
            external_potential(GEOM, B, x) + well, filled_potential(GEOM, B, x)
        )
    assert_allclose(filled_potential(GEOM, 0.0, np.array([67.0])), [GEOM.v0])
    g0 = DeviceGeometry(v0=0.0)
    assert np.array_equal(
        filled_potential(g0, 0.05, x), external_potential(g0, 0.05, x)
    )


def test_bias_cubic_ramp():
    s = BiasSchedule(mode="cubic", B_I=0.0, B_inf=0.1, t0=1000.0)
    assert s.bias_at(-5.0) == 0.0
    assert s.bias_at(0.0) == 0.0
    assert s.bias_at(1000.0) == 0.1
    assert s.bias_at(2000.0) == 0.1
    assert_allclose(s.bias_at(500.0), 0.05)
    # C^1: one-sided difference quotients agree to O(dt) at both joints
    dt = 1e-3
    for t in (0.0, 1000.0):
        fwd = (s.bias_at(t + dt) - s.bias_at(t)) / dt
        bwd = (s.bias_at(t) - s.bias_at(t - dt)) / dt
        assert abs(fwd - bwd) < 1e-5


def test_bias_step_and_constant():
    s = BiasSchedule(mode="step", B_I=0.02, B_inf=0.1)
    assert s.bias_at(0.0) == 0.02
    assert s.bias_at(1.0) == 0.1
    c = BiasSchedule(mode="constant", B_I=0.03)
    assert c.bias_at(1e6) == 0.03
    with pytest.raises(ValueError):
        BiasSchedule(mode="linear")


def test_injection_profile_shape():
    k = np.linspace(0.0, PARAMS.default_kM(), 400)
    g = injection_profile(PARAMS, k)
    assert np.all(g > 0)
    assert np.all(np.diff(g) < 0)                       # strictly decreasing
    assert np.array_equal(g, injection_profile(PARAMS, -k))  # even, exactly
    # tail suppression at the cutoff (value of the formula at kM)
    ratio = g[-1] / g[0]
    assert ratio < 1e-2
    assert_allclose(ratio, 5.06e-4, rtol=0.02)


def test_dispersion_branches():
    assert dispersion(PARAMS, 0.0, 0.1) == 0.0
    half = np.linspace(0.01, 0.5, 50)
    k = np.concatenate([-half[::-1], [0.0], half])
    e0 = dispersion(PARAMS, k, 0.0)
    assert np.array_equal(e0, e0[::-1])                 # even at zero bias
    eb = dispersion(PARAMS, -0.3, 0.1)
    assert_allclose(eb, dispersion(PARAMS, 0.3, 0.1) - 0.1)
    # continuity of the two branches at k -> 0 when B = 0
    assert abs(dispersion(PARAMS, -1e-12, 0.0) - dispersion(PARAMS, 1e-12, 0.0)) < 1e-20


def test_doping_profile():
    x = np.array([10.0, 67.5, 130.0])
    assert_allclose(doping_profile(GEOM, x), [GEOM.nD1, GEOM.nD2, GEOM.nD1])
    flat = DeviceGeometry(nD1=1e-3, nD2=1e-3 - 1e-15)
    assert np.ptp(doping_profile(flat, x)) < 2e-15


def test_grids_invariants():
    g = Grids(L=135.0, J=300, P=300, P_coarse=150)
    assert g.nu == 2
    assert g.k_nodes().size == 301
    assert g.k_nodes_coarse()[::1].size == 151
    # coarse nodes are a subset of fine nodes
    assert_allclose(g.k_nodes()[:: g.nu], g.k_nodes_coarse())
    assert g.check_stability(PhysicalParams()) > 1.0
    with pytest.raises(ValueError, match="multiple"):
        Grids(L=135.0, J=300, P=301, P_coarse=150)
    with pytest.raises(ValueError, match="coarse"):
        Grids(L=135.0, J=10, P=4, P_coarse=4, dt=1.0, kM=0.1).check_stability(
            PhysicalParams()
        )
