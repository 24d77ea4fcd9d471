import json
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate, special

from vcglab import oracles
from vcglab.kernels import family_batch, uniform_batch
from vcglab.sampling import CostModel, sample_batch
from vcglab.setsystem import k3_path_family


def _order_stat_cov(n, i, j):
    # U(0,1) order statistics, i <= j
    i, j = min(i, j), max(i, j)
    return Fraction(i * (n + 1 - j), (n + 1) ** 2 * (n + 2))


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (9, 4)])
def test_uniform_matroid_stats_from_order_statistics(n, k):
    cf = oracles.uniform_matroid_uniform_stats(n, k)
    assert cf["E_cstar"] == sum(Fraction(i, n + 1) for i in range(1, k + 1))
    assert cf["E_vcg"] == k * Fraction(k + 1, n + 1)
    var_c = sum(_order_stat_cov(n, i, j) for i in range(1, k + 1) for j in range(1, k + 1))
    assert cf["Var_cstar"] == var_c
    assert cf["Var_vcg"] == k * k * _order_stat_cov(n, k + 1, k + 1)
    # the difference VCG - 2 c* has variance 4 Var c* - Var VCG
    assert 4 * cf["Var_cstar"] - cf["Var_vcg"] == cf["Var_diff"]


def test_uniform_matroid_exponential_from_spacings():
    cf = oracles.uniform_matroid_exponential_means(4, 2)
    assert cf["E_cstar"] == Fraction(5, 6) and cf["E_vcg"] == Fraction(13, 6)


def test_uniform_matroid_stats_against_simulation():
    cf = oracles.uniform_matroid_uniform_stats(5, 2).floats()
    costs, _ = sample_batch(CostModel.iid("uniform", 5), 1, 0, 200000)
    out = uniform_batch(costs, 2)
    assert abs(out[:, 0].mean() - cf["E_cstar"]) < 4 * out[:, 0].std() / math.sqrt(len(out))
    assert abs(out[:, 1].var() - cf["Var_vcg"]) < 0.02 * cf["Var_vcg"]


def test_parameter_errors():
    for n, k in [(3, 0), (3, 3), (1, 1)]:
        with pytest.raises(ValueError):
            oracles.uniform_matroid_uniform_stats(n, k)
    with pytest.raises(TypeError):
        oracles.uniform_matroid_uniform_stats(4.5, 2)
    with pytest.raises(ValueError):
        oracles.k3_path_density(0.5, 2.5)
    with pytest.raises(ValueError):
        oracles.k3_path_cond_mean(2.0)
    with pytest.raises(ValueError):
        oracles.k3_path_bin_mean(0.5, 0.4)
    with pytest.raises(ValueError):
        oracles.zeta(1)
    with pytest.raises(ValueError):
        oracles.beta_ratio(0.0)


def _dblquad(f):
    # split where the density is discontinuous: y = 1 and x = y, x = 2 - y
    total = 0.0
    for ylo, yhi in ((0.0, 1.0), (1.0, 2.0)):
        for xlo, xhi in ((lambda y: 0.0, lambda y: min(y, 2 - y)), (lambda y: min(y, 2 - y), lambda y: 1.0)):
            v, _ = integrate.dblquad(lambda x, y: f(x, y), ylo, yhi, xlo, xhi, epsabs=1e-11)
            total += v
    return total


def test_k3_path_density_integrates():
    d = oracles.k3_path_density
    assert _dblquad(d) == pytest.approx(1.0, abs=1e-9)
    assert _dblquad(lambda x, y: x * d(x, y)) == pytest.approx(11 / 24, abs=1e-9)
    assert _dblquad(lambda x, y: y * d(x, y)) == pytest.approx(13 / 12, abs=1e-9)


def test_k3_path_marginal_and_conditional():
    for y in (0.3, 0.9, 1.2, 1.7):
        lo, hi = (0.0, 1.0)
        pts = [min(y, 2 - y)]
        m, _ = integrate.quad(lambda x: oracles.k3_path_density(x, y), lo, hi, points=pts)
        assert m == pytest.approx(oracles.k3_path_vcg_density(y), abs=1e-10)
        mx, _ = integrate.quad(lambda x: x * oracles.k3_path_density(x, y), lo, hi, points=pts)
        assert mx / m == pytest.approx(oracles.k3_path_cond_mean(y), abs=1e-10)
    assert integrate.quad(oracles.k3_path_vcg_density, 0, 2, points=[1.0])[0] == pytest.approx(1.0)
    # above one half just past y = 1
    assert oracles.k3_path_bin_mean(0.95, 1.05) == pytest.approx(0.52489, abs=1e-5)


def test_k3_path_against_kernel():
    fam = k3_path_family()
    costs, _ = sample_batch(CostModel.iid("uniform", 3), 2, 0, 200000)
    out = family_batch(costs, fam.incidence)
    cf = oracles.k3_path_uniform_stats().floats()
    for col, key in ((0, "E_cstar"), (1, "E_vcg")):
        assert abs(out[:, col].mean() - cf[key]) < 4 * out[:, col].std() / math.sqrt(len(out))
    costs, _ = sample_batch(CostModel.iid("exp", 3), 2, 0, 200000)
    out = family_batch(costs, fam.incidence)
    assert abs(out[:, 1].mean() - 2.5) < 4 * out[:, 1].std() / math.sqrt(len(out))


def test_zeta_and_mst_constants():
    for s in (2, 3, 4, 7):
        assert oracles.zeta(s) == pytest.approx(special.zeta(s), rel=1e-15)
    c = oracles.mst_constants().floats()
    assert c["var_cstar_coeff"] == pytest.approx(1.685712, abs=1e-6)
    assert c["var_vcg_coeff"] == pytest.approx(4.338733, abs=1e-6)
    assert c["two_zeta3"] == pytest.approx(2 * special.zeta(3))


def test_beta_ratio_and_dump():
    assert oracles.beta_ratio(1.0) == 0.5
    assert oracles.beta_ratio(2.0) == pytest.approx(2 / 3)
    d = oracles.all_constants()
    json.dumps(d, allow_nan=False)
    assert d["uniform_matroid_uniform[4,2]"]["exact"]["E_cstar"] == "3/5"
