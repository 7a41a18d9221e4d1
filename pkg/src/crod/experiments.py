"""Monte Carlo experiment suites and their CSV outputs.

Each suite maps seeded trials over a worker pool and reduces the results in
trial order, so outputs are byte-identical for any worker count.  Per-trial
randomness comes from Philox streams keyed by (master seed, point index,
trial index, component), with the matrix stream optionally pinned when the
same measurement matrix should be reused across trials.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import repeat

import numpy as np

from .config import ExperimentConfig
from .detect import (coefficient, debias, detect, rho_ca_fixed_point, rss,
                     sigma_w2_crod, sigma_w_camp, sigma_w_sdl_complex, threshold)
from .errors import ConfigError, IllPosedInstanceError
from .lasso import SolverOptions, solve_lasso
from .signal_model import (ROW_ORTHOGONAL_ENSEMBLES, ProblemInstance, draw_signal,
                           make_matrix, observe, snr_to_noise_variance)
from .stats import ecdf, ground_truth_sigma_w, ks_test, normalize_w, std_normal_cdf

GAUSS_PARTS = ("null_re", "null_im", "support_re", "support_im")

CURVE_GRID = np.linspace(-4.0, 4.0, 161)

# Slack for strict threshold comparisons on quantities certified to ~1e-8;
# matches the tolerance of the debias shift identities.
DOMINANCE_SLACK = 1e-6

ESTIMATORS = ("CROD", "CAMP", "SDL")


@dataclass(frozen=True)
class SweepPoint:
    index: int
    gamma: float
    M: int
    rho2: float
    snr_db: object
    sigma2: float


@dataclass
class GaussianityResult:
    ks_rows: list
    curve_grid: np.ndarray
    curves: dict
    streams: dict
    null_ratio: np.ndarray
    trials: int


@dataclass
class VarianceResult:
    rows: list
    mean_ree: dict


@dataclass
class DetectionResult:
    rows: list
    rates: dict


@dataclass
class DominanceResult:
    rows: list
    total_violations: int


def _points(cfg: ExperimentConfig):
    name = cfg.sweep_param
    points = []
    for idx, value in enumerate(cfg.sweep_values):
        gamma = value if name == "gamma" else _scalar(cfg.gamma)
        rho2 = value if name == "rho2" else _scalar(cfg.rho2)
        snr = value if name == "snr_db" else cfg.snr_db
        M = int(round(gamma * cfg.N))
        if cfg.sigma2 is not None:
            sigma2 = cfg.sigma2
        else:
            # matched-filter SNR uses the realized compression rate M/N
            sigma2 = snr_to_noise_variance(snr, M / cfg.N, cfg.sigma_x2)
        points.append(SweepPoint(index=idx, gamma=M / cfg.N, M=M, rho2=rho2,
                                 snr_db=snr, sigma2=sigma2))
    return points


def _scalar(value):
    if isinstance(value, tuple):
        raise ConfigError("internal: sweep value used where a scalar is required")
    return value


def _solver_opts(cfg):
    step = 1.0 if cfg.ensemble in ROW_ORTHOGONAL_ENSEMBLES else "auto"
    return SolverOptions(step=step)


@lru_cache(maxsize=8)
def _cached_matrix(kind, M, N, seed, point, trial, stream):
    key = np.random.SeedSequence(seed, spawn_key=(point, trial, stream))
    return make_matrix(kind, M, N, key)


def _trial_instance(cfg, point: SweepPoint, trial):
    if cfg.fix_matrix:
        A = _cached_matrix(cfg.ensemble, point.M, cfg.N, cfg.seed, point.index, 0, 3)
    else:
        A = _cached_matrix.__wrapped__(cfg.ensemble, point.M, cfg.N, cfg.seed,
                                       point.index, trial, 0)
    sig_key = np.random.SeedSequence(cfg.seed, spawn_key=(point.index, trial, 1))
    noise_key = np.random.SeedSequence(cfg.seed, spawn_key=(point.index, trial, 2))
    x0, support = draw_signal(cfg.N, point.rho2, cfg.sigma_x2, sig_key)
    y, xi = observe(A, x0, point.sigma2, noise_key)
    return ProblemInstance(A=A, x0=x0, support=support, xi=xi, y=y,
                           gamma=point.gamma, rho2=point.rho2,
                           sigma_x2=cfg.sigma_x2, sigma2=point.sigma2)


def _single_threaded_blas():
    # workers are process-parallel already; BLAS threads only oversubscribe
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(1, "blas")
    except ImportError:
        pass


def _map_trials(worker, cfg, point, n_trials):
    if cfg.parallelism <= 1 or n_trials <= 1:
        return [worker(cfg, point, t) for t in range(n_trials)]
    chunk = max(1, math.ceil(n_trials / (cfg.parallelism * 8)))
    with ProcessPoolExecutor(max_workers=cfg.parallelism,
                             initializer=_single_threaded_blas) as pool:
        return list(pool.map(worker, repeat(cfg), repeat(point), range(n_trials),
                             chunksize=chunk))


def _null_mask(N, support):
    mask = np.ones(N, dtype=bool)
    mask[support] = False
    return mask


def _provenance(cfg, extra=()):
    lines = [f"suite={cfg.suite} trials={cfg.trials} seed={cfg.seed}",
             "config: " + " ".join(cfg.canonical_items())]
    lines.extend(extra)
    return lines


def write_csv(rows, path, fieldnames, comments=()):
    """Write dict rows with '#'-prefixed provenance comment lines."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_csv(path):
    """Read back a CSV written by write_csv; returns (comments, rows)."""
    comments, rows = [], []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        header = None
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            if header is None:
                header = next(csv.reader([line]))
                continue
            rows.append(dict(zip(header, next(csv.reader([line])))))
    return comments, rows


def _suffixed(path, tag):
    root, dot, ext = path.rpartition(".")
    if not dot:
        return path + tag
    return f"{root}{tag}.{ext}"


# ---------------------------------------------------------------------------
# gaussianity

def _gaussianity_trial(cfg, point, trial):
    inst = _trial_instance(cfg, point, trial)
    sol = solve_lasso(inst.y, inst.A, cfg.lam, _solver_opts(cfg))
    null = _null_mask(cfg.N, inst.support)
    out = {}
    rho_crom, lam_crom = rho_ca_fixed_point(sol.x_hat, cfg.lam, inst.gamma, "CROM")
    for variant, rule in (("CROM", lam_crom), ("CG", None)):
        if rule is None:
            rho_v, lam_v = rho_ca_fixed_point(sol.x_hat, cfg.lam, inst.gamma, "CG")
        else:
            rho_v, lam_v = rho_crom, lam_crom
        est = debias(inst.y, inst.A, sol.x_hat, lam_v, variant, rho_v)
        w = est.x_d - inst.x0
        re, im = normalize_w(w, ground_truth_sigma_w(w))
        out[(variant, "null_re")] = re[null]
        out[(variant, "null_im")] = im[null]
        out[(variant, "support_re")] = re[~null]
        out[(variant, "support_im")] = im[~null]
        if variant == "CROM":
            sw2_hat = sigma_w2_crod(inst.gamma, rho_v,
                                    rss(inst.y, inst.A, sol.x_hat), inst.sigma2)
            mags = est.x_d[null]
            out["ratio"] = (mags.real**2 + mags.imag**2) / sw2_hat
    return out


def run_gaussianity(cfg: ExperimentConfig):
    """Pooled Gaussianity check of the debiased error, for both coefficients.

    Emits (a) the gap between the standard normal CDF and the empirical CDF
    of each normalized part on a fixed grid and (b) KS p-values per part.
    """
    if cfg.suite != "gaussianity":
        raise ConfigError(f"config is for suite {cfg.suite!r}")
    if cfg.ensemble not in ROW_ORTHOGONAL_ENSEMBLES:
        raise ConfigError("gaussianity suite requires a row-orthogonal ensemble")
    point = _points(cfg)[0]
    results = _map_trials(_gaussianity_trial, cfg, point, cfg.trials)

    streams = {}
    for variant in ("CROM", "CG"):
        for part in GAUSS_PARTS:
            streams[(variant, part)] = np.concatenate(
                [res[(variant, part)] for res in results])
    null_ratio = np.concatenate([res["ratio"] for res in results])

    ks_rows = []
    for variant in ("CROM", "CG"):
        for part in GAUSS_PARTS:
            if cfg.ks_pooling == "pooled":
                sample = streams[(variant, part)]
                stat, p = ks_test(sample, std_normal_cdf)
                n = sample.size
            else:
                stats_per = [ks_test(res[(variant, part)], std_normal_cdf)
                             for res in results]
                stat = float(np.median([s for s, _ in stats_per]))
                p = float(np.median([q for _, q in stats_per]))
                n = int(np.median([res[(variant, part)].size for res in results]))
            ks_rows.append({"variant": variant, "part": part, "n": n,
                            "ks_statistic": stat, "p_value": p})

    curves = {}
    grid_cdf = std_normal_cdf(CURVE_GRID)
    for key, sample in streams.items():
        curves[key] = grid_cdf - ecdf(sample)(CURVE_GRID)

    if cfg.output_path:
        write_csv(ks_rows, cfg.output_path,
                  ["variant", "part", "n", "ks_statistic", "p_value"],
                  _provenance(cfg, (f"ks_pooling={cfg.ks_pooling}",)))
        curve_rows = []
        keys = [(v, p) for v in ("CROM", "CG") for p in GAUSS_PARTS]
        for i, x in enumerate(CURVE_GRID):
            row = {"x": float(x)}
            for v, p in keys:
                row[f"diff_{v.lower()}_{p}"] = float(curves[(v, p)][i])
            curve_rows.append(row)
        write_csv(curve_rows, _suffixed(cfg.output_path, "_curves"),
                  ["x"] + [f"diff_{v.lower()}_{p}" for v, p in keys],
                  _provenance(cfg))
    return GaussianityResult(ks_rows=ks_rows, curve_grid=CURVE_GRID.copy(),
                             curves=curves, streams=streams,
                             null_ratio=null_ratio, trials=cfg.trials)


# ---------------------------------------------------------------------------
# variance-error

def _variance_trial(cfg, point, trial):
    inst = _trial_instance(cfg, point, trial)
    sol = solve_lasso(inst.y, inst.A, cfg.lam, _solver_opts(cfg))
    gamma = inst.gamma
    rho_ca, lam_crom = rho_ca_fixed_point(sol.x_hat, cfg.lam, gamma, "CROM")
    rho_cg, lam_cg = rho_ca_fixed_point(sol.x_hat, cfg.lam, gamma, "CG")
    rss_value = rss(inst.y, inst.A, sol.x_hat)
    est_cg = debias(inst.y, inst.A, sol.x_hat, lam_cg, "CG", rho_cg)
    if cfg.ensemble in ROW_ORTHOGONAL_ENSEMBLES:
        ref = debias(inst.y, inst.A, sol.x_hat, lam_crom, "CROM", rho_ca)
    else:
        ref = est_cg
    sigma_true = ground_truth_sigma_w(ref.x_d - inst.x0)
    crod_hat = math.sqrt(sigma_w2_crod(gamma, rho_ca, rss_value, inst.sigma2))
    camp_hat = sigma_w_camp(est_cg.x_d)
    sdl_hat = sigma_w_sdl_complex(sol.residual, gamma, rho_ca)
    return {"CROD": abs(crod_hat - sigma_true) / sigma_true,
            "CAMP": abs(camp_hat - sigma_true) / sigma_true,
            "SDL": abs(sdl_hat - sigma_true) / sigma_true}


def run_variance_error(cfg: ExperimentConfig):
    """Mean relative error of the three deviation estimators per sweep point.

    The reference deviation is the realized RMS of the debiased error under
    the coefficient matched to the configured ensemble.
    """
    if cfg.suite != "variance-error":
        raise ConfigError(f"config is for suite {cfg.suite!r}")
    rows = []
    mean_ree = {}
    sweep = cfg.sweep_param or "gamma"
    for point in _points(cfg):
        results = _map_trials(_variance_trial, cfg, point, cfg.trials)
        sweep_value = getattr(point, sweep if sweep != "snr_db" else "snr_db")
        for name in ESTIMATORS:
            mean = float(np.mean([res[name] for res in results]))
            mean_ree[(point.index, name)] = mean
            rows.append({"sweep_param": sweep, "sweep_value": sweep_value,
                         "estimator": name, "mean_ree": mean,
                         "trials": cfg.trials})
    if cfg.output_path:
        write_csv(rows, cfg.output_path,
                  ["sweep_param", "sweep_value", "estimator", "mean_ree", "trials"],
                  _provenance(cfg))
    return VarianceResult(rows=rows, mean_ree=mean_ree)


# ---------------------------------------------------------------------------
# detection

def _detection_trial(cfg, point, trial):
    inst = _trial_instance(cfg, point, trial)
    sol = solve_lasso(inst.y, inst.A, cfg.lam, _solver_opts(cfg))
    gamma = inst.gamma
    null = _null_mask(cfg.N, inst.support)
    rho_ca, lam_crom = rho_ca_fixed_point(sol.x_hat, cfg.lam, gamma, "CROM")
    rss_value = rss(inst.y, inst.A, sol.x_hat)
    counts = {}
    for name in cfg.detectors:
        try:
            if name == "CROD":
                est = debias(inst.y, inst.A, sol.x_hat, lam_crom, "CROM", rho_ca)
                sw2 = sigma_w2_crod(gamma, rho_ca, rss_value, inst.sigma2)
            elif name == "CAMP":
                rho_cg, lam_cg = rho_ca_fixed_point(sol.x_hat, cfg.lam, gamma, "CG")
                est = debias(inst.y, inst.A, sol.x_hat, lam_cg, "CG", rho_cg)
                sw2 = sigma_w_camp(est.x_d) ** 2
            elif name == "SDL":
                lam_g = coefficient("G", gamma, sol.rho_a)
                est = debias(inst.y, inst.A, sol.x_hat, lam_g, "G", sol.rho_a)
                sw2 = sigma_w_sdl_complex(sol.residual, gamma, rho_ca) ** 2
            else:  # ROD: counting density in both the coefficient and the recursion
                lam_rom = coefficient("ROM", gamma, sol.rho_a)
                est = debias(inst.y, inst.A, sol.x_hat, lam_rom, "ROM", sol.rho_a)
                sw2 = sigma_w2_crod(gamma, sol.rho_a, rss_value, inst.sigma2)
        except IllPosedInstanceError:
            counts[name] = None
            continue
        decisions = detect(est.x_d, threshold(sw2, cfg.p_fa))
        counts[name] = (int(decisions[null].sum()), int(decisions[~null].sum()))
    return counts, int(null.sum()), int(cfg.N - null.sum())


def run_detection(cfg: ExperimentConfig):
    """Aggregate false-alarm and detection rates per detector per sweep point.

    A detector whose coefficient rule is non-positive on a trial is skipped
    for that trial; a point where it never applies gets NaN rates.
    """
    if cfg.suite != "detection":
        raise ConfigError(f"config is for suite {cfg.suite!r}")
    rows = []
    rates = {}
    sweep = cfg.sweep_param or "snr_db"
    for point in _points(cfg):
        n_trials = cfg.trials
        if cfg.min_null_cells > 0:
            per_trial = max(cfg.N * (1.0 - point.rho2), 1.0)
            n_trials = max(n_trials, math.ceil(cfg.min_null_cells / per_trial))
        results = _map_trials(_detection_trial, cfg, point, n_trials)
        sweep_value = getattr(point, sweep)
        for name in cfg.detectors:
            fa = hits = nulls = sups = used = 0
            for counts, n_null, n_sup in results:
                if counts[name] is None:
                    continue
                fa += counts[name][0]
                hits += counts[name][1]
                nulls += n_null
                sups += n_sup
                used += 1
            p_fa = fa / nulls if nulls else float("nan")
            p_d = hits / sups if sups else float("nan")
            rates[(point.index, name)] = (p_fa, p_d)
            rows.append({"sweep_param": sweep, "sweep_value": sweep_value,
                         "detector": name, "p_fa_hat": p_fa, "p_d_hat": p_d,
                         "null_cells": nulls, "support_cells": sups,
                         "trials_used": used, "trials": n_trials})
    if cfg.output_path:
        write_csv(rows, cfg.output_path,
                  ["sweep_param", "sweep_value", "detector", "p_fa_hat", "p_d_hat",
                   "null_cells", "support_cells", "trials_used", "trials"],
                  _provenance(cfg, (f"target_p_fa={cfg.p_fa}",)))
    return DetectionResult(rows=rows, rates=rates)


# ---------------------------------------------------------------------------
# dominance

def _dominance_trial(cfg, point, trial):
    inst = _trial_instance(cfg, point, trial)
    sol = solve_lasso(inst.y, inst.A, cfg.lam, _solver_opts(cfg))
    rule = "CROM" if cfg.ensemble in ROW_ORTHOGONAL_ENSEMBLES else "CG"
    rho, lam_coeff = rho_ca_fixed_point(sol.x_hat, cfg.lam, inst.gamma, rule)
    est = debias(inst.y, inst.A, sol.x_hat, lam_coeff, rule, rho)
    null = _null_mask(cfg.N, inst.support)
    mag_hat = np.abs(sol.x_hat)
    mag_d = np.abs(est.x_d)
    shift = cfg.lam / lam_coeff
    top = 1.1 * mag_hat.max() + 1e-12
    viol_null = viol_sup = 0
    for kappa in np.linspace(0.0, top, cfg.kappa_points):
        phi_lasso = mag_hat > kappa
        fired = mag_d > kappa + shift + DOMINANCE_SLACK
        quiet = mag_d <= kappa + shift - DOMINANCE_SLACK
        viol_null += int((fired & ~phi_lasso)[null].sum())
        viol_sup += int((quiet & phi_lasso)[~null].sum())
    return {"trial": trial, "violations_null": viol_null,
            "violations_support": viol_sup,
            "active_count": int(np.count_nonzero(sol.x_hat)),
            "kappa_points": cfg.kappa_points}


def run_dominance(cfg: ExperimentConfig):
    """Per-trial check that debiased decisions dominate plain thresholding.

    With the paired thresholds (kappa, kappa + lambda/Lambda) the debiased
    test can only drop null-set detections and only add support detections;
    the emitted violation counts are expected to be zero.
    """
    if cfg.suite != "dominance":
        raise ConfigError(f"config is for suite {cfg.suite!r}")
    point = _points(cfg)[0]
    rows = _map_trials(_dominance_trial, cfg, point, cfg.trials)
    total = sum(r["violations_null"] + r["violations_support"] for r in rows)
    if cfg.output_path:
        write_csv(rows, cfg.output_path,
                  ["trial", "violations_null", "violations_support",
                   "active_count", "kappa_points"],
                  _provenance(cfg))
    return DominanceResult(rows=rows, total_violations=total)


SUITE_RUNNERS = {
    "gaussianity": run_gaussianity,
    "variance-error": run_variance_error,
    "detection": run_detection,
    "dominance": run_dominance,
}
