import math

import numpy as np
import pytest

import avghb


def test_parameters():
    p = avghb.optimal_hb_params(L=100.0, mu=1.0)
    assert p.alpha == pytest.approx(4.0 / 121.0)
    assert p.beta == pytest.approx((9.0 / 11.0) ** 2)
    assert avghb.wahb_stepsize(L=10.0, beta=0.0) == pytest.approx(1.0 / 40.0)
    assert avghb.wahb_stepsize(L=10.0, beta=0.5) == pytest.approx(0.25 / (40.0 * math.sqrt(1.5)))
    assert avghb.hb_peak_lower_bound(1e4) == pytest.approx(100.0 / (2 * math.e))


def test_problem_families():
    q = avghb.nesterov(dim=20, L=100.0, mu=1.0)
    assert q.family == "nesterov"
    assert q.dim == 20
    x = np.ones(20)
    g = q.gradient(x)
    h = 1e-6
    fd = np.array([(q.value(x + h * e) - q.value(x - h * e)) / (2 * h) for e in np.eye(20)])
    assert np.allclose(g, fd, rtol=1e-5, atol=1e-6)
    assert q.gap(q.x_star) == pytest.approx(0.0, abs=1e-12)

    lr = avghb.synthetic_logreg(m=100, d=5, l2=0.1, seed=3)
    assert lr.family == "logreg"
    assert lr.mu == pytest.approx(0.1)
    assert np.linalg.norm(lr.gradient(lr.x_star)) < 1e-8


def test_run_columns_and_averaging():
    q = avghb.diag_quadratic(mu=1.0, interior=[10.0, 100.0], L=1000.0)
    p = avghb.optimal_hb_params(q.L, q.mu)
    t = avghb.run(q, p.alpha, p.beta, np.ones(4), iters=200)
    assert len(t["k"]) == 201
    assert not t["diverged"]
    a = avghb.run(q, 1.0 / q.L, 0.9, np.ones(4), iters=200, scheme="uniform")
    assert max(a["inf_norm_raw"]) > 0
    assert a["f_gap_avg"][-1] < a["f_gap_avg"][0]


def test_restart():
    q = avghb.random_quadratic(dim=8, seed=1, mu=1.0, L=20.0)
    x0 = np.ones(8)
    r0 = np.linalg.norm(x0 - q.x_star)
    eps = 1e-6 * r0**2
    out = avghb.run_rahb(q, beta=0.3, eps=eps, x0=x0)
    assert out["tau"] == len(out["stage_gaps"])
    assert q.gap(out["x_hat"]) <= eps


def test_deviation():
    spec = [1.0, 10.0, 100.0]
    hb = avghb.dev_measure(spec, alpha=0.01, beta=0.8)
    ahb = avghb.dev_measure(spec, alpha=0.01, beta=0.8, scheme="uniform")
    assert hb["converged"] and ahb["converged"]
    assert ahb["dev_value"] <= hb["dev_value"] + 1e-12
    assert avghb.theorem3_ratio_bound(200.0) == pytest.approx(0.0666, abs=1e-3)


def test_errors_and_cli():
    with pytest.raises(avghb.Error):
        avghb.nesterov(dim=1, L=10.0, mu=1.0)
    code, out, err = avghb.cli_main(["deviation", "--spectrum", "1,10,100", "--alpha", "0.01",
                                     "--beta", "0.5"])
    assert code == 0, err
    assert out.splitlines()[0].startswith("scheme,alpha,beta,dev_value")
    code, _, _ = avghb.cli_main(["run", "/nonexistent.cfg"])
    assert code != 0
