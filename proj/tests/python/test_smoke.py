import csv
import math
import os
import subprocess

import pytest

import mfwalk


def test_version():
    assert mfwalk.__version__ == "0.1.0"


def test_critical_values():
    assert mfwalk.conjectured_critical_N(2, 1.0) == pytest.approx(6.0)
    assert mfwalk.continuum_critical(2, 1.0) == pytest.approx(4.0)
    lam = mfwalk.conjectured_critical_limit(1.0)
    assert (1 + 1 / lam) * math.log1p(lam) - 1 == pytest.approx(math.log(2.0), abs=1e-10)
    assert mfwalk.epsilon_N(2, 1.0) == pytest.approx(2.0)


def test_jump_rates():
    model = mfwalk.ModelSpec.small_jump(2, 0.0, lambda_=2.0)
    rates = mfwalk.jump_rates([0, 1], model)
    assert sum(r for _, r in rates) == pytest.approx(4.0)
    assert model.n_particles == 2
    assert model.kernel == "small_jump"


def test_pi2_law():
    law = mfwalk.pi2(0.0, 2.0)
    mass = law["mass"]
    assert mass[0][0] == pytest.approx(law["c"] / 2)
    assert mass[0][2] / mass[0][1] == pytest.approx(0.5)
    assert mass[1][0] / mass[0][0] == pytest.approx(0.5)
    assert law["stationarity_residual"] <= 1e-12
    total = sum(sum(row) for row in mass) + law["tail_bound"]
    assert total == pytest.approx(1.0, abs=1e-12)


def test_bd_stationary_from_point_mass():
    pi = mfwalk.bd_stationary(mfwalk.ProbabilityVector.point_mass(0), 0.0, lambda_=1.0)
    for x in range(10):
        assert pi.mass[x] == pytest.approx(0.5 ** (x + 1))


def test_exceptions():
    assert issubclass(mfwalk.NonErgodicParameter, mfwalk.Error)
    with pytest.raises(mfwalk.NonErgodicParameter):
        mfwalk.pi2(1.0, 1.0)
    with pytest.raises(mfwalk.InvalidInput):
        mfwalk.ModelSpec.small_jump(0, 0.0, lambda_=1.0)


def test_fixed_point():
    out = mfwalk.gamma_fixed_point(0.5, 3.0)
    assert out["converged"]
    assert out["reflected_identity_residual"] <= 1e-8


@pytest.mark.skipif("MFW_CLI" not in os.environ, reason="CLI not built")
def test_cli_pi2(tmp_path):
    dest = tmp_path / "pi2.csv"
    subprocess.run([os.environ["MFW_CLI"], "pi2", "--delta", "0", "--lambda", "2", "--out", str(dest)], check=True)
    rows = [r for r in csv.reader(l for l in dest.read_text().splitlines() if not l.startswith("#"))]
    mass = {(int(r[0]), int(r[1])): float(r[2]) for r in rows[1:]}
    assert mass[(0, 0)] == pytest.approx(mass[(0, 1)])
    assert mass[(0, 2)] == pytest.approx(mass[(0, 1)] / 2)
