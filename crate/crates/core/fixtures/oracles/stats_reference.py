#!/usr/bin/env python3
"""Reference values for the statistics core, computed with scipy/statsmodels.

Writes fixtures/stats/*.json. Run from crates/core/. Seeds are fixed, so the
output is reproducible given the same library versions.
"""
import json
from pathlib import Path

import numpy as np
import scipy
import scipy.stats as st
import statsmodels
import statsmodels.api as sm
from statsmodels.stats.outliers_influence import variance_inflation_factor

OUT = Path(__file__).resolve().parents[1] / "stats"
N_FIXTURES = 12


def dump(name, payload):
    payload = {
        "generator": f"scipy {scipy.__version__}, statsmodels {statsmodels.__version__}",
        **payload,
    }
    (OUT / f"{name}.json").write_text(json.dumps(payload, indent=1) + "\n")


def spearman_cases():
    cases = []
    for seed in range(N_FIXTURES):
        rng = np.random.default_rng(1000 + seed)
        n = [20, 20, 25, 30, 40, 50, 60, 75, 100, 150, 200, 300][seed]
        x = rng.normal(size=n)
        y = 0.4 * x + rng.normal(size=n)
        if seed % 3 == 1:
            # coarse values force ties
            x = np.round(x, 0)
            y = np.round(y * 2) / 2
        res = st.spearmanr(x, y)
        cases.append({"x": x.tolist(), "y": y.tolist(), "rho": float(res.statistic), "p_value": float(res.pvalue)})
    return cases


def partial_spearman_reference(x, y, controls):
    rx = st.rankdata(x)
    ry = st.rankdata(y)
    rc = np.column_stack([st.rankdata(c) for c in controls.T])
    design = np.column_stack([np.ones(len(x)), rc])
    ex = rx - design @ np.linalg.lstsq(design, rx, rcond=None)[0]
    ey = ry - design @ np.linalg.lstsq(design, ry, rcond=None)[0]
    r = float(np.dot(ex, ey) / np.sqrt(np.dot(ex, ex) * np.dot(ey, ey)))
    df = len(x) - 2 - controls.shape[1]
    t = r * np.sqrt(df / (1 - r * r))
    p = float(2 * st.t.sf(abs(t), df))
    return r, p


def partial_cases():
    cases = []
    for seed in range(N_FIXTURES):
        rng = np.random.default_rng(2000 + seed)
        n = [30, 40, 50, 60, 80, 100, 120, 150, 200, 250, 300, 400][seed]
        k = 1 + seed % 3
        controls = rng.normal(size=(n, k))
        x = controls @ rng.normal(size=k) + rng.normal(size=n)
        y = 0.3 * x + controls @ rng.normal(size=k) + rng.normal(size=n)
        if seed % 4 == 2:
            controls[:, 0] = np.round(controls[:, 0])
        r, p = partial_spearman_reference(x, y, controls)
        cases.append({
            "x": x.tolist(), "y": y.tolist(), "controls": controls.tolist(),
            "rho": r, "p_value": p, "df": n - 2 - k,
        })
    return cases


def ols_cases():
    cases = []
    for seed in range(N_FIXTURES):
        rng = np.random.default_rng(3000 + seed)
        n = 50 + 10 * seed
        p = 3 + seed % 3
        X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1)) * rng.uniform(0.5, 20, size=p - 1)])
        beta = rng.normal(size=p)
        y = X @ beta + rng.normal(scale=2.0, size=n)
        fit = sm.OLS(y, X).fit()
        cases.append({
            "x": X.tolist(), "y": y.tolist(),
            "beta": fit.params.tolist(), "se": fit.bse.tolist(),
            "r_squared": float(fit.rsquared),
        })
    return cases


def vif_cases():
    cases = []
    for seed in range(N_FIXTURES):
        rng = np.random.default_rng(4000 + seed)
        n = 60 + 15 * seed
        k = 4
        base = rng.normal(size=(n, k))
        mix = np.eye(k) + rng.uniform(-0.6, 0.6, size=(k, k))
        preds = base @ mix
        X = np.column_stack([np.ones(n), preds])
        vifs = [float(variance_inflation_factor(X, j)) for j in range(1, k + 1)]
        cases.append({"predictors": preds.tolist(), "vif": vifs})
    return cases


def gaussian_glm_cases():
    cases = []
    for seed in range(N_FIXTURES):
        rng = np.random.default_rng(5000 + seed)
        n = 40 + 20 * seed
        p = 2 + seed % 4
        X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
        y = X @ rng.normal(size=p) + rng.normal(size=n)
        fit = sm.GLM(y, X, family=sm.families.Gaussian()).fit(tol=1e-12)
        cases.append({"x": X.tolist(), "y": y.tolist(), "beta": fit.params.tolist(), "se": fit.bse.tolist()})
    return cases


def nb_cases():
    cases = []
    for seed in range(N_FIXTURES):
        rng = np.random.default_rng(6000 + seed)
        n = 150 + 50 * seed
        p = 2 + seed % 3
        X = np.column_stack([np.ones(n), rng.normal(scale=0.7, size=(n, p - 1))])
        beta = np.concatenate([[1.0 + 0.1 * seed], rng.uniform(-0.6, 0.6, size=p - 1)])
        alpha = [0.3, 0.5, 0.8, 1.2][seed % 4]
        mu = np.exp(X @ beta)
        lam = rng.gamma(shape=1 / alpha, scale=alpha * mu)
        y = rng.poisson(lam).astype(float)

        # Joint ML over (beta, alpha) as the independent route to alpha-hat.
        joint = sm.NegativeBinomial(y, X, loglike_method="nb2")
        start = np.append(np.linalg.lstsq(X, np.log(y + 0.5), rcond=None)[0], 0.5)
        res = joint.fit(start_params=start, method="bfgs", maxiter=5000, gtol=1e-10, disp=0)
        res = joint.fit(start_params=res.params, method="newton", maxiter=200, tol=1e-14, disp=0)
        alpha_hat = float(res.params[-1])

        glm = sm.GLM(y, X, family=sm.families.NegativeBinomial(alpha=alpha_hat)).fit(tol=1e-14, maxiter=500)
        assert np.max(np.abs(glm.params - res.params[:-1])) < 1e-6, (seed, glm.params, res.params)
        cases.append({
            "x": X.tolist(), "y": y.tolist(),
            "alpha": alpha_hat,
            "beta": glm.params.tolist(), "se": glm.bse.tolist(),
            "log_likelihood": float(glm.llf),
        })
    return cases


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    dump("spearman", {"cases": spearman_cases()})
    dump("partial_spearman", {"cases": partial_cases()})
    dump("ols", {"cases": ols_cases()})
    dump("vif", {"cases": vif_cases()})
    dump("glm_gaussian", {"cases": gaussian_glm_cases()})
    dump("glm_negative_binomial", {"cases": nb_cases()})
    print("ok")


if __name__ == "__main__":
    main()
