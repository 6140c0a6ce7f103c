"""End-to-end acceptance checks, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary
(see conftest.py). Statistical checks use fixed seeds.
"""

import math

import numpy as np
import pytest

from latticepf.cli import main
from latticepf.errors import DegenerateWeightsError
from latticepf.experiments import (
    ExperimentConfig,
    ExperimentReport,
    efficiency_gain,
    ensemble_spread,
    run_rmse,
    variance_difference,
)
from latticepf.filtering import FilterConfig, ParticleSet, estimate, pf_step, reweight, run_filter
from latticepf.lattice import LatticeRule, draw_shift, generator_table, korobov_points
from latticepf.models import BodyModel, LinearGaussianModel, ToyBinaryModel, kalman_filter, simulate_sequence


def criterion(label):
    return pytest.mark.criterion(label)


@criterion("1 lattice rules: distinct 1-D projections, reference point")
def test_lattice_projections_distinct():
    for (log2n, band), a in generator_table().items():
        n = 2**log2n
        dims = 8 if band == "low" else 32
        i = np.arange(n, dtype=np.int64)
        power = 1
        for _ in range(dims):
            residues = i * power % n
            assert np.bincount(residues, minlength=n).max() == 1, (log2n, band)
            power = power * a % n
    pts = korobov_points(LatticeRule(256, 25, 2))
    assert tuple(pts[1]) == (1 / 256, 25 / 256)


@criterion("2 shifted lattice integration: unbiased, lower variance than MC")
def test_qmc_integration_variance():
    rng = np.random.default_rng(0)
    rule = LatticeRule(256, 25, 2)
    qmc = np.array([np.prod(korobov_points(rule.with_shift(draw_shift(2, rng))), axis=1).mean() for _ in range(100)])
    mc = np.array([np.prod(rng.random((256, 2)), axis=1).mean() for _ in range(100)])
    se = qmc.std(ddof=1) / math.sqrt(100)
    print(f"qmc var {qmc.var(ddof=1):.3e}  mc var {mc.var(ddof=1):.3e}")
    assert abs(qmc.mean() - 0.25) <= 3 * se
    assert qmc.var(ddof=1) < mc.var(ddof=1)


@criterion("3 linear-Gaussian: PF and LPF ensemble means match Kalman")
@pytest.mark.slow
def test_kalman_oracle():
    model = LinearGaussianModel()
    seq = simulate_sequence(model, 21, np.random.default_rng(0))
    km, _ = kalman_filter(seq.observations[1:], model)
    for scheme, code in (("lpf", 1), ("pf", 2)):
        config = FilterConfig(512, "residual", scheme)
        means = np.array([
            run_filter(model, seq.observations, seq.states[0], config, np.random.default_rng([code, r])).means[1:, 0]
            for r in range(200)
        ])
        se = means.std(axis=0, ddof=1) / math.sqrt(200)
        z = np.abs(means.mean(axis=0) - km) / se
        print(f"{scheme}: max |z| over 20 steps = {z.max():.2f}")
        assert np.all(z <= 3), scheme


@criterion("4 toy model: PF loss-of-track rate, LPF never loses track")
@pytest.mark.slow
def test_toy_loss_of_track():
    model = ToyBinaryModel()
    observations = [1] * 21  # 20 propagations after the initial state
    trials = 10_000
    rng = np.random.default_rng(0)
    pf = FilterConfig(10, "residual", "pf")
    lost = 0
    for _ in range(trials):
        try:
            run_filter(model, observations, model.initial_state, pf, rng)
        except DegenerateWeightsError:
            lost += 1
    p = 1 - (1 - 0.8**10) ** 20
    freq = lost / trials
    print(f"PF loss frequency {freq:.4f}, theory {p:.4f}")
    assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / trials)

    lpf = FilterConfig(10, "residual", "lpf", generator=1)
    counts = []

    def record(t, particles):
        if t > 0:
            counts.append(int(np.sum(particles.states[:, 0] < 0.2)))

    for _ in range(trials):
        run_filter(model, observations, model.initial_state, lpf, rng, on_step=record)
    assert len(counts) == 20 * trials
    assert min(counts) >= 2


@pytest.fixture(scope="module")
def disk_report():
    base = dict(trials=200, steps=40, seed=0)
    pf = run_rmse(ExperimentConfig("disk", n_values=(64, 96, 128), schemes=("pf",), **base))
    lpf = run_rmse(ExperimentConfig("disk", n_values=(64,), schemes=("lpf",), **base))
    return ExperimentReport("disk", pf.config, pf.curves + lpf.curves)


@criterion("5 disk task: variance difference in [5%, 35%], LPF MSE below PF")
@pytest.mark.slow
def test_disk_variance_difference(disk_report):
    vd = variance_difference(disk_report, "pf", "lpf", 64)
    pf_mse = np.mean(disk_report.curve("pf", 64).mse)
    lpf_mse = np.mean(disk_report.curve("lpf", 64).mse)
    print(f"variance difference {vd:.2f}%  (PF MSE {pf_mse:.4f}, LPF MSE {lpf_mse:.4f})")
    assert lpf_mse < pf_mse
    assert 5.0 <= vd <= 35.0


@criterion("6 disk task: efficiency gain of at least 15%")
@pytest.mark.slow
def test_disk_efficiency_gain(disk_report):
    gain = efficiency_gain(disk_report, "pf", "lpf", 64)
    print(f"efficiency gain {gain}")
    assert gain.beyond_grid or gain.percent >= 15.0


@criterion("7a body model: analytic gradient matches finite differences")
def test_body_gradient():
    model = BodyModel()
    rng = np.random.default_rng(0)
    y = model.observe(rng.normal(0, 0.3, 10), rng)
    q = rng.normal(0, 0.3, (100, 10))
    grad = model.log_likelihood_grad(y, q)
    h = 1e-6
    fd = np.empty_like(grad)
    for j in range(10):
        e = np.zeros(10)
        e[j] = h
        fd[:, j] = (model.log_likelihood(y, q + e) - model.log_likelihood(y, q - e)) / (2 * h)
    rel = np.linalg.norm(grad - fd, axis=1) / np.linalg.norm(fd, axis=1)
    print(f"max relative gradient error {rel.max():.2e}")
    assert np.all(rel < 1e-4)


@criterion("7b body model: LPF ensemble spread below PF at most steps and angles")
@pytest.mark.slow
def test_body_spread():
    model = BodyModel()
    seq = simulate_sequence(model, 40, np.random.default_rng(0))
    pf = ensemble_spread(seq, model, "pf", 256, 100, seed=0)
    lpf = ensemble_spread(seq, model, "lpf", 256, 100, seed=0)
    below = lpf.std[1:] < pf.std[1:]  # step 0 is the known initial state
    print(f"LPF spread below PF in {below.mean():.1%} of step/angle cells")
    assert pf.failed == 0 and lpf.failed == 0
    assert below.mean() > 0.5


@criterion("8 toy model: indicator estimate equals 1 after y=1")
def test_indicator_estimate_is_exact():
    model = ToyBinaryModel()
    rng = np.random.default_rng(0)
    particles = ParticleSet.at_state(model.initial_state, 50)
    moved = pf_step(particles, 1, model, FilterConfig(50), rng, t=1)
    assert estimate(moved, lambda x: (x[:, 0] < 0.2).astype(float)) == 1.0
    mixed = ParticleSet(np.array([[0.1], [0.5], [0.15], [0.9]]), np.full(4, 0.25))
    assert estimate(reweight(mixed, 1, model), lambda x: (x[:, 0] < 0.2).astype(float)) == 1.0


@criterion("9 bench: byte-identical outputs across repeats and thread counts")
@pytest.mark.parametrize("name", ["disk", "toy", "lingauss", "body"])
def test_bench_reproducible(name, tmp_path):
    outputs = []
    for k, threads in enumerate(("1", "1", "3")):
        out = tmp_path / f"run{k}"
        argv = ["bench", name, "--n", "16,32", "--trials", "4", "--steps", "6", "--seed", "11",
                "--threads", threads, "--out", str(out), "--quiet"]
        assert main(argv) == 0
        outputs.append(((out / "report.json").read_bytes(), (out / "rmse.csv").read_bytes()))
    assert outputs[0] == outputs[1] == outputs[2]
