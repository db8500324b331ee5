"""Acceptance suite: one test per acceptance criterion, at the stated
tolerances, on the desk-scale benchmark (N=200, P=50, 50 runs).

Each test prints a single ``[ACCEPTANCE] criterion N: PASS/FAIL`` line (plus
detail lines on failure). The two experiment sweeps are computed once per
session and shared across criteria.
"""

import itertools
import time

import numpy as np
import pytest
import scipy.stats

from grafhub.experiments import ExperimentGrid, run_experiment1, run_experiment2
from grafhub.graph import (
    Graph,
    apply_filter,
    compute_shifted_signals,
    filter_response,
    normalized_laplacian,
    spectral_decompose,
    total_variation,
)
from grafhub.metrics import auc_roc, global_efficiency, knockout_delta_ge, sed_profile
from grafhub.scoring import (
    participation_coefficient,
    score_reconstruction,
    select_topk,
)
from grafhub.solver import GrafhubConfig, assemble_system, fit, soft_threshold
from grafhub.synth import SynthConfig, generate_ba, generate_er, generate_instance

DESK = SynthConfig(n_nodes=200, er_p=0.1, n_signals=50)
MASTER_SEED = 20260823
N_RUNS = 50


def report(criterion: str, ok: bool, details=()):
    print(f"[ACCEPTANCE] criterion {criterion}: {'PASS' if ok else 'FAIL'}")
    for line in details:
        print(f"    {line}")
    assert ok, f"criterion {criterion} failed:\n" + "\n".join(details)


def pooled_se(a, b, n=N_RUNS):
    return float(np.sqrt(a.std_auc**2 / n + b.std_auc**2 / n))


@pytest.fixture(scope="module")
def exp1():
    grid = ExperimentGrid(
        base=DESK,
        models=("ER", "BAdegree", "BAMixed"),
        u_values=(1.0, 2.0, 4.0, 6.0),
        n_runs=N_RUNS,
        seed=MASTER_SEED,
    )
    start = time.time()
    result = run_experiment1(grid)
    return result, time.time() - start


@pytest.fixture(scope="module")
def exp2():
    grid = ExperimentGrid(
        base=DESK,
        models=("ER", "BAdegree", "BAMixed"),
        hub_fractions=(0.1, 0.3, 0.5, 0.7),
        n_runs=N_RUNS,
        seed=MASTER_SEED + 1,
    )
    return run_experiment2(grid)


class TestCriterion1OracleSuite:
    def test_criterion_1(self):
        start = time.time()
        failures = []
        rng = np.random.default_rng(0)

        # soft-threshold prox vs grid search (1e-4)
        x = rng.uniform(-2.5, 2.5, size=200)
        kappa = 0.3
        grid_pts = np.arange(-3.0, 3.0 + 1e-12, 1e-4)
        costs = kappa * np.abs(grid_pts)[None] + 0.5 * (grid_pts[None] - x[:, None]) ** 2
        if np.max(np.abs(soft_threshold(x, kappa) - grid_pts[np.argmin(costs, 1)])) > 1e-4:
            failures.append("soft-threshold prox oracle mismatch")

        # filter spectral vs polynomial path, 100 random graphs N <= 50
        for _ in range(100):
            n = int(rng.integers(2, 51))
            upper = np.triu(rng.random((n, n)) < 0.3, k=1)
            g = Graph((upper | upper.T).astype(float))
            ln = normalized_laplacian(g)
            decomp = spectral_decompose(ln)
            f = rng.standard_normal((n, 3))
            h = rng.standard_normal(int(rng.integers(2, 6)))
            spectral = apply_filter(decomp, h, f)
            poly, power = np.zeros_like(f), f.copy()
            for coeff in h:
                poly += coeff * power
                power = ln @ power
            if np.linalg.norm(spectral - poly) > 1e-8 * max(np.linalg.norm(poly), 1e-30):
                failures.append("filter path equivalence broke")
                break

        # h-update stationarity by central finite differences
        g = generate_er(10, 0.5, seed=1)
        ln = normalized_laplacian(g)
        decomp = spectral_decompose(ln)
        signals = rng.standard_normal((10, 3))
        shifted = compute_shifted_signals(decomp, signals, 3)
        z = rng.standard_normal(signals.shape) * 0.3
        dual = rng.standard_normal(signals.shape) * 0.2
        system = assemble_system(shifted, ln, 1.0)
        b = np.tensordot(shifted, z - signals + dual, axes=([1, 2], [0, 1]))
        h_star = np.linalg.solve(system, -b)

        def smooth(h):
            filt = np.tensordot(h, shifted, axes=1)
            return np.sum(filt * (ln @ filt)) + 0.5 * np.sum(
                (z - signals + filt + dual) ** 2
            )

        grad = np.array(
            [
                (smooth(h_star + e) - smooth(h_star - e)) / 2e-6
                for e in np.eye(3) * 1e-6
            ]
        )
        if np.linalg.norm(grad) > 1e-5 * (1 + np.linalg.norm(b)):
            failures.append("h-update stationarity gradient too large")

        # AUC vs brute-force pair counting (exact)
        scores = rng.integers(0, 5, size=40).astype(float)
        labels = rng.random(40) < 0.3
        pos, neg = np.flatnonzero(labels), np.flatnonzero(~labels)
        credit = sum(
            1.0 if scores[i] > scores[j] else 0.5 if scores[i] == scores[j] else 0.0
            for i, j in itertools.product(pos, neg)
        )
        if auc_roc(scores, labels) != credit / (pos.size * neg.size):
            failures.append("AUC != brute-force pair count")

        # total variation trace vs edgewise sum (1e-8)
        g = generate_er(8, 0.6, seed=2)
        f = rng.standard_normal((8, 3))
        d = g.degrees
        edgewise = 0.5 * sum(
            g.adjacency[i, j]
            * np.sum((f[i] / np.sqrt(d[i]) - f[j] / np.sqrt(d[j])) ** 2)
            for i in range(8)
            for j in range(8)
            if g.adjacency[i, j] > 0
        )
        if abs(total_variation(normalized_laplacian(g), f) - edgewise) > 1e-8 * edgewise:
            failures.append("total variation trace/edgewise mismatch")

        # GE of K_n exactly 1
        if global_efficiency(Graph(1.0 - np.eye(9))) != 1.0:
            failures.append("GE(K_n) != 1")

        # participation hand cases 0, 0.5, 0.75
        a = np.zeros((5, 5))
        a[0, 1:] = a[1:, 0] = 1.0
        p4 = participation_coefficient(Graph(a), np.array([0, 0, 1, 2, 3]))[0]
        a2 = np.zeros((3, 3))
        a2[0, 1] = a2[1, 0] = a2[0, 2] = a2[2, 0] = 1.0
        p2 = participation_coefficient(Graph(a2), np.array([0, 0, 1]))[0]
        a3 = np.zeros((3, 3))
        a3[0, 1] = a3[1, 0] = 1.0
        p0 = participation_coefficient(Graph(a3), np.array([0, 0, 1]))[0]
        if not (p0 == 0.0 and abs(p2 - 0.5) < 1e-12 and abs(p4 - 0.75) < 1e-12):
            failures.append("participation hand cases off")

        elapsed = time.time() - start
        if elapsed >= 60:
            failures.append(f"oracle suite too slow: {elapsed:.1f}s")
        report("1 (oracle suite)", not failures, failures + [f"{elapsed:.1f}s"])


class TestCriterion2Experiment1:
    def test_criterion_2(self, exp1):
        exp1, elapsed = exp1
        failures, notes = [], []
        u_values = (1.0, 2.0, 4.0, 6.0)

        # 2a: degree on BAdegree, AUC = 1 +- 0.01 at every u
        for u in u_values:
            mean = exp1.cell("BAdegree", "degree", u).mean_auc
            if abs(mean - 1.0) > 0.01:
                failures.append(f"degree@BAdegree u={u}: mean {mean:.4f} not 1+-0.01")

        # 2b: GraFHub nondecreasing in u on ER within one pooled SE
        for method in ("grafhub_re", "grafhub_sm"):
            cells = [exp1.cell("ER", method, u) for u in u_values]
            for lo, hi in zip(cells, cells[1:]):
                if hi.mean_auc < lo.mean_auc - pooled_se(lo, hi):
                    failures.append(
                        f"{method}@ER not nondecreasing: u={lo.x_value} "
                        f"{lo.mean_auc:.4f} -> u={hi.x_value} {hi.mean_auc:.4f}"
                    )

        # 2c: ER u=2 separations, each by margin > 1 pooled SE
        gs = exp1.cell("ER", "grafhub_sm", 2.0)
        for centrality in ("degree", "eigenvector", "closeness", "betweenness"):
            c = exp1.cell("ER", centrality, 2.0)
            margin = gs.mean_auc - c.mean_auc
            if margin <= pooled_se(gs, c):
                failures.append(
                    f"grafhub_sm vs {centrality}: margin {margin:.4f} "
                    f"<= pooled SE {pooled_se(gs, c):.4f}"
                )
        for suffix in ("re", "sm"):
            gh = exp1.cell("ER", f"grafhub_{suffix}", 2.0)
            dr = exp1.cell("ER", f"direct_{suffix}", 2.0)
            margin = gh.mean_auc - dr.mean_auc
            if margin <= pooled_se(gh, dr):
                failures.append(
                    f"grafhub_{suffix} {gh.mean_auc:.5f} vs direct_{suffix} "
                    f"{dr.mean_auc:.5f}: margin {margin:+.5f} <= pooled SE "
                    f"{pooled_se(gh, dr):.5f}"
                )

        # 2d: Sm >= RE on average over ER cells -- warning only
        sm = np.mean([exp1.cell("ER", "grafhub_sm", u).mean_auc for u in u_values])
        re = np.mean([exp1.cell("ER", "grafhub_re", u).mean_auc for u in u_values])
        if sm < re:
            print(
                f"[ACCEPTANCE]     warning: mean Sm {sm:.4f} < mean RE {re:.4f} "
                "over ER cells (reported only)"
            )

        notes.append(f"experiment 1 runtime {elapsed / 60:.1f} min")
        if elapsed >= 15 * 60:
            failures.append(f"experiment 1 exceeded 15 min: {elapsed / 60:.1f} min")
        report("2 (experiment 1, desk scale)", not failures, failures + notes)


class TestCriterion3Experiment2:
    def test_criterion_3(self, exp2):
        failures = []
        fractions = (0.1, 0.3, 0.5, 0.7)

        for model in ("ER", "BAdegree", "BAMixed"):
            for method in ("grafhub_re", "grafhub_sm"):
                at10 = exp2.cell(model, method, 0.1).mean_auc
                at70 = exp2.cell(model, method, 0.7).mean_auc
                if not at70 < at10:
                    failures.append(
                        f"{method}@{model}: AUC at 70% ({at70:.4f}) not strictly "
                        f"below 10% ({at10:.4f})"
                    )
            for centrality in ("degree", "eigenvector", "closeness", "betweenness"):
                means = [exp2.cell(model, centrality, f).mean_auc for f in fractions]
                rho = scipy.stats.spearmanr(fractions, means).statistic
                if not abs(rho) < 0.5:
                    failures.append(
                        f"{centrality}@{model} not flat: means "
                        f"{[round(m, 4) for m in means]}, |rho| = {abs(rho):.2f}"
                    )
        report("3 (experiment 2, desk scale)", not failures, failures)


class TestCriterion4LowPass:
    def test_criterion_4(self):
        hits = 0
        for seed in range(20):
            inst = generate_instance(
                SynthConfig(
                    model="ER", n_nodes=200, er_p=0.1, n_signals=50,
                    gamma=30.0, hub_strength=2.0, seed=seed,
                )
            )
            decomp = spectral_decompose(normalized_laplacian(inst.graph))
            result = fit(
                inst.graph, inst.signals,
                GrafhubConfig(alpha=1.0, filter_order=4, seed=seed),
                decomp=decomp,
            )
            response = np.abs(filter_response(result.coefficients, decomp.eigenvalues))
            low = response[decomp.eigenvalues < 1.0].mean()
            high = response[decomp.eigenvalues >= 1.0].mean()
            hits += low > high
        report(
            "4 (low-pass learned filters)",
            hits >= 18,
            [f"low-pass in {hits}/20 instances (need >= 18)"],
        )


class TestCriterion5SedCoupling:
    def test_criterion_5(self):
        ratios, hub_scores = [], []
        strengths = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
        for i in range(20):
            inst = generate_instance(
                SynthConfig(
                    model="ER", n_nodes=200, er_p=0.1, n_signals=50,
                    hub_strength=strengths[i % 6], seed=1000 + i,
                )
            )
            decomp = spectral_decompose(normalized_laplacian(inst.graph))
            ratios.append(sed_profile(decomp, inst.signals).sed_ratio)
            result = fit(
                inst.graph, inst.signals,
                GrafhubConfig(alpha=1.0, filter_order=4, seed=i),
                decomp=decomp,
            )
            scores = score_reconstruction(inst.signals, result.filtered)
            k = int(inst.hub_labels.sum())
            hub_scores.append(scores[select_topk(scores, k)].mean())
        rho = scipy.stats.spearmanr(ratios, hub_scores).statistic
        report(
            "5 (SED-hub coupling)",
            rho > 0.5,
            [f"Spearman rho = {rho:.3f} (need > 0.5)"],
        )


class TestCriterion6Knockout:
    def test_criterion_6(self):
        wins = 0
        for seed in range(20):
            g = generate_ba(200, 3, seed)
            order = np.lexsort((np.arange(200), -g.degrees))
            hubs = order[:10]
            rng = np.random.default_rng(seed)
            normals = rng.choice(order[10:], size=10, replace=False)
            if knockout_delta_ge(g, hubs).mean() > knockout_delta_ge(g, normals).mean():
                wins += 1
        report(
            "6 (knockout direction)",
            wins == 20,
            [f"hub knockout larger in {wins}/20 seeds (need 20/20)"],
        )


class TestCriterion7Determinism:
    def test_criterion_7(self, tmp_path):
        failures = []

        # benchmark cell rerun reproduces per-run AUCs bitwise
        grid = ExperimentGrid(
            base=SynthConfig(n_nodes=80, er_p=0.1, n_signals=15),
            models=("ER",),
            u_values=(2.0,),
            methods=("degree", "lof", "grafhub_re", "grafhub_sm", "direct_sm"),
            n_runs=5,
            alpha_grid=(0.5, 2.0),
            order_grid=(2, 4),
            seed=MASTER_SEED,
        )
        a, b = run_experiment1(grid), run_experiment1(grid)
        for key in a.cells:
            if not np.array_equal(a.cells[key].aucs, b.cells[key].aucs):
                failures.append(f"benchmark cell {key} differs between reruns")

        # synth CLI reruns byte-identically
        from grafhub.cli import main

        for name in ("s1", "s2"):
            code = main(
                ["synth", "--n", "100", "--signals", "10", "--seed", "3",
                 "--out", str(tmp_path / name)]
            )
            assert code == 0
        for fname in ("graph.csv", "signals.csv", "clean_signals.csv", "labels.csv"):
            if (tmp_path / "s1" / fname).read_bytes() != (
                tmp_path / "s2" / fname
            ).read_bytes():
                failures.append(f"synth output {fname} not byte-identical")
        report("7 (determinism)", not failures, failures)
