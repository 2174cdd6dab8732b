import math

import numpy as np
import pytest

from gravmeasure.domain import Constants, resolution_for_gamma, toy_scenario
from gravmeasure.errors import BoundaryLeak, GridMismatch
from gravmeasure.kernels import (
    LogComplexAmplitude,
    PotentialExpansion,
    driven_oscillator_quadratic,
    relative_difference,
    unmeasured_kernel_l,
)
from gravmeasure.oracle import (
    EffectiveHamiltonianSpec,
    SpatialGrid,
    WavePacket,
    compare_l2,
    compose_over_midpoint,
    evolve,
    propagate_closed_form,
    time_sliced_kernel,
)
from gravmeasure.records import make_record

FREE = EffectiveHamiltonianSpec(PotentialExpansion(0.0, 0.0, 0.0), 0.0, None, 1.0, 1.0)
GRID = SpatialGrid(-15.0, 15.0, 1201)


def test_grid_invariants():
    g = SpatialGrid(0.0, 1.0, 65)
    assert g.spacing == 1 / 64 and g.points[-1] == 1.0
    with pytest.raises(ValueError):
        SpatialGrid(0.0, 1.0, 63)


def test_gaussian_is_normalized():
    assert abs(WavePacket.gaussian(GRID, 0.3, 0.7, 1.1).norm - 1) < 1e-10


def test_free_packet_moves_and_keeps_norm():
    p = WavePacket.gaussian(GRID, -2.0, 0.8, 1.5)
    out = evolve(FREE, p, GRID, 2.0, 400)
    assert out.mean_position == pytest.approx(-2.0 + 1.5 * 2.0, abs=2e-4)
    assert abs(out.norm - 1) < 1e-10


def test_measurement_decay_depends_on_record_distance():
    s = toy_scenario()
    res = resolution_for_gamma(s, 1.0)
    near = make_record("constant", 0, 1, 257, res, c=0.0)
    far = make_record("constant", 0, 1, 257, res, c=1.5)
    p = WavePacket.gaussian(GRID, 0.0, 0.5)
    n_near = evolve(EffectiveHamiltonianSpec(FREE.potential, 2 / res**2, near, 1.0, 1.0), p, GRID, 1.0, 200).norm
    n_far = evolve(EffectiveHamiltonianSpec(FREE.potential, 2 / res**2, far, 1.0, 1.0), p, GRID, 1.0, 200).norm
    assert n_far < n_near < 1.0


def test_strength_from_scenario():
    s = toy_scenario()
    rec = make_record("constant", 0, 1, 11, 2.0, c=0.0)
    assert EffectiveHamiltonianSpec.from_scenario(s, rec).measurement_strength == 0.5
    assert EffectiveHamiltonianSpec.from_scenario(s, rec.with_resolution(math.inf)).measurement_strength == 0.0
    with pytest.raises(ValueError):
        EffectiveHamiltonianSpec(FREE.potential, -1.0, None, 1.0, 1.0)


def test_boundary_leak_detected():
    small = SpatialGrid(-3.0, 3.0, 301)
    p = WavePacket.gaussian(small, 0.0, 0.3, 0.0)
    with pytest.raises(BoundaryLeak) as info:
        evolve(FREE, p, small, 3.0, 300)
    assert info.value.leak > 1e-8


def test_evolve_rejects_foreign_grid_and_few_steps():
    p = WavePacket.gaussian(GRID, 0.0, 1.0)
    with pytest.raises(GridMismatch):
        evolve(FREE, p, SpatialGrid(-15.0, 15.0, 1001), 1.0, 200)
    with pytest.raises(ValueError):
        evolve(FREE, p, GRID, 1.0, 50)


def test_snapshots(tmp_path):
    p = WavePacket.gaussian(GRID, 0.0, 1.0)
    evolve(FREE, p, GRID, 0.2, 100, snapshot_every=50, snapshot_dir=str(tmp_path))
    files = sorted(x.name for x in tmp_path.iterdir())
    assert files == ["snapshot_000050.csv", "snapshot_000100.csv"]
    assert (tmp_path / files[0]).read_text().splitlines()[0] == "l_m,re,im"


def test_closed_form_identity_as_T_shrinks():
    # the kernel width sqrt(T) must stay resolved where the packet lives
    grid = SpatialGrid(-1.5, 1.5, 4001)
    p = WavePacket.gaussian(grid, 0.0, 0.25, 0.5)
    errs = []
    for T in (1e-1, 1e-2, 1e-3):
        k = driven_oscillator_quadratic(1.0, 1e-9, T, Constants.toy())
        errs.append(compare_l2(p, propagate_closed_form(k, p))["relative_l2_unaligned"])
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_closed_form_is_linear():
    p = WavePacket.gaussian(GRID, 0.0, 1.0)
    q = WavePacket.gaussian(GRID, 1.0, 0.6, 0.4)
    k = unmeasured_kernel_l(toy_scenario(T=0.5))
    mix = p.with_values(2 * p.values - 0.5j * q.values)
    lhs = propagate_closed_form(k, mix).values
    rhs = 2 * propagate_closed_form(k, p).values - 0.5j * propagate_closed_form(k, q).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(lhs))


def test_cn_matches_closed_form_short_unmonitored():
    s = toy_scenario(T=0.3)
    p = WavePacket.gaussian(GRID, 0.2, 0.55, 0.3)
    a = propagate_closed_form(unmeasured_kernel_l(s), p)
    b = evolve(EffectiveHamiltonianSpec.from_scenario(s), p, GRID, 0.3, 300)
    assert compare_l2(a, b)["relative_l2_unaligned"] < 1e-4


def test_compare_l2_examples():
    p = WavePacket.gaussian(GRID, 0.0, 1.0)
    r = compare_l2(p, p)
    assert r["relative_l2"] == 0 and r["phase_offset"] == 0
    r = compare_l2(p, p.with_values(np.exp(0.7j) * p.values))
    assert r["relative_l2"] < 1e-14 and r["phase_offset"] == pytest.approx(0.7)
    rng = np.random.default_rng(3)
    noise = rng.standard_normal(GRID.n_points) + 1j * rng.standard_normal(GRID.n_points)
    noise *= 1e-3 * np.linalg.norm(p.values) / np.linalg.norm(noise)
    assert compare_l2(p, p.with_values(p.values + noise))["relative_l2"] == pytest.approx(1e-3, rel=0.05)
    with pytest.raises(GridMismatch):
        compare_l2(p, WavePacket.gaussian(SpatialGrid(-1, 1, 64), 0, 1))


def test_sliced_free_action_is_exact():
    s = toy_scenario(l_P=0.1, l_Q=0.7, M=1e-300)
    res = time_sliced_kernel(s, 8)
    ref = LogComplexAmplitude.from_log(0.5 * np.log(1 / (2j * math.pi)) + 0.5j * 0.6**2)
    assert relative_difference(res.raw_N, ref) < 1e-13
    assert relative_difference(res.raw_half, ref) < 1e-13
    with pytest.raises(ValueError):
        time_sliced_kernel(s, 7)


def test_sliced_matches_unmeasured_closed_form():
    s = toy_scenario(l_P=0.0, l_Q=0.01, T=0.1)
    sl = time_sliced_kernel(s, 64).value
    e = s.endpoints
    assert relative_difference(sl, unmeasured_kernel_l(s)(e.l_Q, e.l_P)) < 1e-4


def test_midpoint_composition():
    s = toy_scenario(l_P=0.1, l_Q=0.25)
    half = unmeasured_kernel_l(toy_scenario(T=0.5))
    # the constant phase of each half adds up to that of the whole
    got = compose_over_midpoint(half, half, 0.1, 0.25)
    want = unmeasured_kernel_l(s).log_value(0.25, 0.1)
    assert abs(np.exp(got - want) - 1) < 1e-6


def test_unitary_over_ten_thousand_steps():
    grid = SpatialGrid(-12.0, 12.0, 601)
    spec = EffectiveHamiltonianSpec(PotentialExpansion(-1.0, 1.0, -0.02), 0.0, None, 1.0, 1.0)
    p = WavePacket.gaussian(grid, 0.0, 1.0, 0.2)
    out = evolve(spec, p, grid, 1.0, 10_000)
    assert abs(out.norm - p.norm) <= 1e-10
