"""Experiment drivers: segmentation, rescaling and the Monte-Carlo checks.

Every driver returns an :class:`ExperimentReport`. Records are stored
column-wise; aggregates are always derived from the records, never stored
separately, so a report read back from CSV reproduces the same numbers.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .density import (Hyperparams, delta_sum, density_P, density_P_at,
                      density_Q, kernel_width, norm_constant, parse_dm)
from .graph import (build_graph_original, build_graph_simplified, connected_components,
                    count_local_maxima, count_superpixels)
from .pixels import LabelMap, Region, check_image
from .rng import trial_seed
from .synthetic import BicolorModel, FlatModel, bicolor_image, flat_image
from . import theory

log = logging.getLogger(__name__)

VARIANTS = ("original", "simplified")

# brackets for the bundled synthetic flat spec (256 x 256, k_s=5, d_m=inf)
SIZE_BRACKETS = {2.0: (3.0, 5.0), 3.0: (6.0, 12.0)}
PARAM_BRACKETS = {2.0: (3.0, 4.5), 0.5: (0.18, 0.35)}
SYNTHETIC_SIGMA = 10.0


class ConfigError(ValueError):
    pass


def _json_num(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, dict):
        return {k: _json_num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_num(v) for v in x]
    return x


@dataclass
class Verdict:
    name: str
    value: float | None
    lo: float | None = None
    hi: float | None = None
    passed: bool | None = None  # None: no verdict (uninformative or hypothesis unmet)
    note: str = ""

    @classmethod
    def within(cls, name, value, lo=None, hi=None, note=""):
        ok = (lo is None or value >= lo) and (hi is None or value <= hi)
        return cls(name, float(value), lo, hi, bool(ok), note)

    def line(self) -> str:
        tag = {True: "PASS", False: "FAIL", None: "N/A "}[self.passed]
        lo = "-inf" if self.lo is None else f"{self.lo:.6g}"
        hi = "inf" if self.hi is None else f"{self.hi:.6g}"
        val = "nan" if self.value is None else f"{self.value:.6g}"
        extra = f"  ({self.note})" if self.note else ""
        return f"{tag} {self.name}: {val} in [{lo}, {hi}]{extra}"


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    records: dict[str, np.ndarray] = field(default_factory=dict)
    group_by: list[str] = field(default_factory=list)
    values: list[str] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def num_records(self) -> int:
        return len(next(iter(self.records.values()))) if self.records else 0

    def warn(self, msg: str) -> None:
        log.warning(msg)
        self.warnings.append(msg)

    def aggregates(self) -> list[dict]:
        return aggregate(self.records, self.group_by, self.values)

    @property
    def passed(self) -> bool:
        return all(v.passed is not False for v in self.verdicts)

    def to_dict(self, with_records: bool = False) -> dict:
        out = {"experiment": self.experiment, "config": self.config,
               "aggregates": self.aggregates(),
               "verdicts": [v.__dict__ for v in self.verdicts],
               "passed": self.passed, "warnings": self.warnings, **self.extra}
        if with_records:
            out["records"] = {k: list(v) for k, v in self.records.items()}
        return _json_num(out)

    def write(self, out_dir: str | os.PathLike, fmt: str = "csv") -> list[Path]:
        """CSV records plus JSON summary, or a single JSON with records."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        if fmt == "csv":
            path = out_dir / f"{self.experiment}.csv"
            write_records_csv(self.records, path)
            paths.append(path)
        elif fmt != "json":
            raise ValueError(f"unknown report format {fmt!r}")
        path = out_dir / f"{self.experiment}.json"
        path.write_text(json.dumps(self.to_dict(with_records=fmt == "json"), indent=2) + "\n")
        paths.append(path)
        return paths

    def summary_lines(self) -> list[str]:
        return [v.line() for v in self.verdicts]


def aggregate(records: dict[str, np.ndarray], group_by: list[str], values: list[str]) -> list[dict]:
    """Per-group count, mean and sample standard deviation of each value column."""
    if not records or not len(next(iter(records.values()))):
        return []
    keys = list(zip(*(records[g] for g in group_by))) if group_by else [()] * len(
        records[values[0]])
    groups: dict[tuple, list[int]] = {}
    for n, k in enumerate(keys):
        groups.setdefault(tuple(_json_num(x) for x in k), []).append(n)
    out = []
    for k, idx in groups.items():
        row = dict(zip(group_by, k))
        row["n"] = len(idx)
        for v in values:
            x = np.asarray(records[v], dtype=np.float64)[idx]
            row[f"{v}_mean"] = float(np.mean(x))
            row[f"{v}_sd"] = float(np.std(x, ddof=1)) if len(x) > 1 else float("nan")
        out.append(row)
    return out


def write_records_csv(records: dict[str, np.ndarray], path) -> None:
    cols = list(records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*(records[c] for c in cols)):
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x
                        for x in row])


def read_records_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    cols = rows[0]
    out = {}
    for k, c in enumerate(cols):
        vals = [r[k] for r in rows[1:]]
        try:
            out[c] = np.array([float(v) for v in vals])
        except ValueError:
            out[c] = np.array(vals)
    return out


# ---------------------------------------------------------------------------
# segmentation and rescaling

def segment(image: np.ndarray, hp: Hyperparams, variant: str = "original", *,
            squared_dm: bool = False, cut_after_argmin: bool = False,
            origin: tuple[int, int] = (0, 0)) -> tuple[LabelMap, dict]:
    """Quickshift segmentation of a CIELAB image; returns labels and a summary."""
    image = check_image(image)
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    P = density_P(image, hp, origin=origin)
    if variant == "original":
        graph = build_graph_original(image, P, hp, squared_dm=squared_dm,
                                     cut_after_argmin=cut_after_argmin)
    else:
        graph = build_graph_simplified(P, hp.k_w, hp.d_m)
    labels = connected_components(graph)
    H, W = P.shape
    params = hp.as_dict()
    params.update(variant=variant, compat_squared_dm=squared_dm,
                  cut_after_argmin=cut_after_argmin)
    return labels, {"num_superpixels": labels.num_labels, "H": H, "W": W, "params": params}


def num_superpixels(image, hp: Hyperparams, variant: str = "original") -> int:
    return segment(image, hp, variant)[0].num_labels


def rescale_hyperparams(k_s: float, d_m: float, rho: float) -> tuple[float, float]:
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    d_m = parse_dm(d_m)
    return rho * k_s, (d_m if math.isinf(d_m) else rho * d_m)


def _box_matrix(n: int, m: int) -> np.ndarray:
    """(m, n) area-average weights mapping n samples onto m equal cells."""
    edges = np.arange(n + 1) * (m / n)
    lo, hi = edges[:-1], edges[1:]
    cells = np.arange(m)[:, None]
    overlap = np.clip(np.minimum(hi[None, :], cells + 1) - np.maximum(lo[None, :], cells), 0, None)
    return overlap / overlap.sum(axis=1, keepdims=True)


def downsample_box(image: np.ndarray, rho: float) -> np.ndarray:
    """Area-average resize to ``round(H / rho) x round(W / rho)``."""
    image = check_image(image)
    H, W, _ = image.shape
    h, w = max(1, round(H / rho)), max(1, round(W / rho))
    R, C = _box_matrix(H, h), _box_matrix(W, w)
    img = np.asarray(image, dtype=np.float64)
    return np.stack([R @ np.ascontiguousarray(img[:, :, k]) @ C.T for k in range(3)], axis=-1)


# ---------------------------------------------------------------------------
# superpixel count versus image size (flat model)

def evolution(sigma: float, k_s: float, d_m: float, sizes, trials: int, seed: int = 0, *,
              c=(50.0, 0.0, 0.0), variant: str = "original", sigma0: float = 1e-5,
              n_tol: float = 0.15, k_tol: float = 0.25) -> ExperimentReport:
    """Local maxima of Q and superpixels of P over the central region, per image size."""
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("sizes must be strictly increasing")
    d_m = parse_dm(d_m)
    k_w = kernel_width(k_s)
    margin = 2 * k_w
    for s in sizes:
        if s - 2 * margin <= 0:
            raise ConfigError(f"side {s} leaves no pixel at distance {margin} from the border")
    rep = ExperimentReport(
        "evolution",
        {"sigma": sigma, "k_s": k_s, "k_w": k_w, "d_m": d_m, "sizes": sizes, "trials": trials,
         "seed": seed, "c": list(c), "variant": variant, "sigma0": sigma0, "margin": margin},
        group_by=["size"], values=["N_emp", "K_emp"])
    if not sigma <= k_s / 5:
        rep.warn(f"sigma={sigma} exceeds k_s/5; Q is not guaranteed to approximate P")
    cols = {k: [] for k in ("size", "trial", "N_emp", "K_emp")}
    preds = []
    for s in sizes:
        region = Region.centered((s, s), margin)
        exact = theory.expected_local_maxima_exact(region, (s, s), k_w, d_m)
        asym = theory.expected_local_maxima_asymptotic(region.height, region.width, k_w, d_m)
        preds.append({"size": s, "N_exact_pred": exact, "N_asymp_pred": asym.expected,
                      "case": asym.case})
        for t in range(trials):
            ts = trial_seed(seed, t)
            hp = Hyperparams(k_s=k_s, d_m=d_m, sigma0=sigma0, seed=ts)
            img = flat_image(FlatModel(s, s, c, sigma, ts))
            Q = density_Q(img, k_s, sigma, c, k_w)
            labels, _ = segment(img, hp, variant)
            cols["size"].append(s)
            cols["trial"].append(t)
            cols["N_emp"].append(count_local_maxima(Q, k_w, d_m, region))
            cols["K_emp"].append(count_superpixels(labels, region))
    rep.records = {k: np.asarray(v) for k, v in cols.items()}
    rep.extra["predictions"] = preds
    aggs = {a["size"]: a for a in rep.aggregates()}
    for p in preds:
        a = aggs.get(p["size"])
        if a is None:
            continue
        n_emp, k_emp, n_pred = a["N_emp_mean"], a["K_emp_mean"], p["N_exact_pred"]
        rep.verdicts.append(Verdict.within(
            f"size {p['size']}: N_emp / N_exact_pred", n_emp / n_pred, 1 - n_tol, 1 + n_tol))
        rep.verdicts.append(Verdict.within(
            f"size {p['size']}: K_emp / N_emp", k_emp / n_emp if n_emp else float("inf"),
            1 - k_tol, 1 + k_tol))
    return rep


def evolution_table(rep: ExperimentReport) -> list[dict]:
    """Rows (size, N_emp, K_emp, N_exact_pred, N_asymp_pred) for plotting."""
    aggs = {a["size"]: a for a in rep.aggregates()}
    rows = []
    for p in rep.extra["predictions"]:
        a = aggs.get(p["size"], {})
        rows.append({"size": p["size"], "N_emp": a.get("N_emp_mean", float("nan")),
                     "K_emp": a.get("K_emp_mean", float("nan")),
                     "N_exact_pred": p["N_exact_pred"], "N_asymp_pred": p["N_asymp_pred"]})
    return rows


# ---------------------------------------------------------------------------
# scaling laws

def synthetic_flat_images(n: int, size: int = 256, sigma: float = SYNTHETIC_SIGMA,
                          seed: int = 0, c=(50.0, 0.0, 0.0)):
    for t in range(n):
        ts = trial_seed(seed, t)
        yield f"flat-{ts}", flat_image(FlatModel(size, size, c, sigma, ts))


def _scale_report(name, images, hp, factors, variant, brackets, make_new):
    rep = ExperimentReport(
        name, {**hp.as_dict(), "variant": variant, "factors": list(factors)},
        group_by=["factor"], values=["ratio"])
    cols = {k: [] for k in ("image", "factor", "n_orig", "n_new", "ratio")}
    for label, img in images:
        img = check_image(img)
        n_orig = None
        for f in factors:
            new = make_new(img, hp, f, rep)
            if new is None:
                continue
            if n_orig is None:
                n_orig = num_superpixels(img, hp, variant)
            new_img, new_hp = new
            n_new = n_orig if (new_img is img and new_hp == hp) else num_superpixels(
                new_img, new_hp, variant)
            cols["image"].append(label)
            cols["factor"].append(float(f))
            cols["n_orig"].append(n_orig)
            cols["n_new"].append(n_new)
            cols["ratio"].append(n_orig / n_new)
    rep.records = {k: np.asarray(v) for k, v in cols.items()}
    for a in rep.aggregates():
        f = float(a["factor"])
        if brackets and f in brackets:
            lo, hi = brackets[f]
            rep.verdicts.append(Verdict.within(f"factor {f:g}: mean n_orig/n_new",
                                               a["ratio_mean"], lo, hi))
    return rep


def scale_size(images, hp: Hyperparams, rhos, variant: str = "original",
               brackets: dict | None = None) -> ExperimentReport:
    """n_orig / n_new where n_new segments the image box-downsampled by rho."""
    def make_new(img, hp, rho, rep):
        if not rho >= 1:
            raise ConfigError(f"rho must be >= 1, got {rho}")
        H, W, _ = img.shape
        if min(H, W) < 2 * rho:
            rep.warn(f"image {H}x{W} is smaller than 2*rho={2 * rho} pixels per side; skipped")
            return None
        return (img, hp) if rho == 1 else (downsample_box(img, rho), hp)
    return _scale_report("scale_size", images, hp, rhos, variant, brackets, make_new)


def scale_params(images, hp: Hyperparams, kappas, variant: str = "original",
                 brackets: dict | None = None) -> ExperimentReport:
    """n_orig / n_new where n_new uses hyperparameters (kappa k_s, kappa d_m)."""
    def make_new(img, hp, kappa, rep):
        if not kappa > 0:
            raise ConfigError(f"kappa must be positive, got {kappa}")
        if kappa == 1:
            return img, hp
        k_s, d_m = rescale_hyperparams(hp.k_s, hp.d_m, kappa)
        return img, Hyperparams(k_s=k_s, d_m=d_m, ratio=hp.ratio, sigma0=hp.sigma0,
                                seed=hp.seed)
    return _scale_report("scale_params", images, hp, kappas, variant, brackets, make_new)


# ---------------------------------------------------------------------------
# density checks under the statistical models

def _hypotheses(rep: ExperimentReport, k_s: float, sigma: float) -> bool:
    ok = True
    if not k_s >= 5:
        rep.warn(f"hypothesis k_s >= 5 unmet (k_s={k_s})")
        ok = False
    if not sigma <= k_s / 5:
        rep.warn(f"hypothesis sigma <= k_s/5 unmet (sigma={sigma}, k_s={k_s})")
        ok = False
    return ok


def bicolor_layout(k_s: float) -> tuple[int, int, int, int, np.ndarray]:
    """Image shape, boundary and tested columns for the bicolor check.

    Left patch is columns ``< j0``; tested pixels are (i, j) with both j and
    j + 1 in the left patch and within k_w of its last column. All windows of
    tested pixels are unclipped.
    """
    k_w = kernel_width(k_s)
    H, W, j0 = 2 * k_w + 1, 3 * k_w + 2, 2 * k_w + 1
    b = j0 - 1
    return H, W, j0, k_w, np.arange(b - k_w, b)


def bicolor_check(k_s: float, sigma: float, color_gap: float, trials: int, seed: int = 0, *,
                  c1=(50.0, 0.0, 0.0), sigma0: float = 1e-5,
                  near_one: float = 0.99) -> ExperimentReport:
    """Frequency of P_ij > P_i,j+1 next to a vertical colour boundary."""
    H, W, j0, k_w, js = bicolor_layout(k_s)
    i = k_w
    c2 = (c1[0] + color_gap, c1[1], c1[2])
    rep = ExperimentReport(
        "bicolor_check",
        {"k_s": k_s, "k_w": k_w, "sigma": sigma, "color_gap": color_gap, "trials": trials,
         "seed": seed, "H": H, "W": W, "j0": j0, "row": i, "c1": list(c1), "c2": list(c2),
         "sigma0": sigma0, "near_one": near_one},
        group_by=["j"], values=["greater"])
    ok = _hypotheses(rep, k_s, sigma)
    if not color_gap >= 3 * k_s:
        rep.warn(f"hypothesis ||c1-c2|| >= 3 k_s unmet (gap={color_gap})")
        ok = False
    pix = [(i, j) for j in np.append(js, js[-1] + 1)]
    greater = np.empty((trials, len(js)), dtype=np.int64)
    for t in range(trials):
        ts = trial_seed(seed, t)
        img = bicolor_image(BicolorModel(H, W, j0, c1, c2, sigma, ts))
        hp = Hyperparams(k_s=k_s, d_m=math.inf, sigma0=sigma0, seed=ts)
        p = density_P_at(img, pix, hp)
        greater[t] = p[:-1] > p[1:]
    rep.records = {"trial": np.repeat(np.arange(trials), len(js)),
                   "j": np.tile(js, trials), "greater": greater.ravel()}
    bound = theory.bicolor_probability_bound(sigma)
    gaps = {int(j): theory.bicolor_gap(i, int(j), j0, (H, W), k_s, sigma, color_gap) for j in js}
    rep.extra["theory_gap"] = {str(j): g for j, g in gaps.items()}
    rep.extra["bound"] = bound
    if trials == 0:
        return rep
    for a in rep.aggregates():
        j = int(a["j"])
        note = f"offset {j0 - 1 - j} from last left column, theory gap {gaps[j]:.3g}"
        v = Verdict.within(f"j={j}: P(P_ij > P_i,j+1) >= 1 - 16 sigma^2", a["greater_mean"],
                           bound, None, note)
        if not ok:
            v.passed, v.note = None, "hypothesis unmet; " + note
        rep.verdicts.append(v)
        if gaps[j] >= 1.5 * k_s:
            v = Verdict.within(f"j={j}: P(P_ij > P_i,j+1) near one", a["greater_mean"],
                               near_one, None, note)
            if not ok:
                v.passed, v.note = None, "hypothesis unmet; " + note
            rep.verdicts.append(v)
    return rep


def pq_check(k_s: float, sigma: float, eps_list, trials: int, seed: int = 0, *,
             c=(50.0, 0.0, 0.0), sigma0: float = 1e-5) -> ExperimentReport:
    """Frequency of |P_ij - Q_ij| > eps at an interior pixel of a flat image."""
    k_w = kernel_width(k_s)
    n = 2 * k_w + 1
    i = j = k_w
    eps_list = [float(e) for e in eps_list]
    rep = ExperimentReport(
        "pq_check",
        {"k_s": k_s, "k_w": k_w, "sigma": sigma, "eps": eps_list, "trials": trials,
         "seed": seed, "size": n, "c": list(c), "sigma0": sigma0},
        group_by=["eps"], values=["exceed"])
    ok = _hypotheses(rep, k_s, sigma)
    D = delta_sum(i, j, (n, n), k_s)
    C1 = norm_constant(1, k_s, sigma)
    diff = np.empty(trials)
    for t in range(trials):
        ts = trial_seed(seed, t)
        img = flat_image(FlatModel(n, n, c, sigma, ts))
        hp = Hyperparams(k_s=k_s, d_m=math.inf, sigma0=sigma0, seed=ts)
        p = density_P_at(img, [(i, j)], hp)[0]
        g = math.exp(-float(np.sum((img[i, j] - np.asarray(c)) ** 2))
                     / (2.0 * (k_s * k_s + sigma * sigma)))
        diff[t] = abs(p - C1 * g * D)
    rep.records = {"trial": np.tile(np.arange(trials), len(eps_list)),
                   "eps": np.repeat(eps_list, trials),
                   "abs_diff": np.tile(diff, len(eps_list)),
                   "exceed": np.concatenate([(diff > e).astype(np.int64) for e in eps_list])}
    if trials == 0:
        return rep
    for a in rep.aggregates():
        e = float(a["eps"])
        bound = theory.pq_tail_bound(sigma, e)
        v = Verdict.within(f"eps={e:g}: P(|P-Q| > eps) <= 71 sigma^2/eps^2",
                           a["exceed_mean"], None, bound)
        if bound >= 1:
            v.passed, v.note = None, "uninformative (bound >= 1)"
        elif not ok:
            v.passed, v.note = None, "hypothesis unmet"
        rep.verdicts.append(v)
    return rep


def moments_check(k_s: float, sigma: float, trials: int, seed: int = 0, *,
                  c=(50.0, 0.0, 0.0), sigma0: float = 0.0, n_se: float = 4.0,
                  center_exact: bool = False) -> ExperimentReport:
    """Monte-Carlo mean and variance of P at an interior pixel against theory."""
    k_w = kernel_width(k_s)
    n = 2 * k_w + 1
    i = j = k_w
    rep = ExperimentReport(
        "moments_check",
        {"k_s": k_s, "k_w": k_w, "sigma": sigma, "trials": trials, "seed": seed, "size": n,
         "c": list(c), "sigma0": sigma0, "n_se": n_se, "center_exact": center_exact},
        values=["P"])
    ok = _hypotheses(rep, k_s, sigma)
    vals = np.empty(trials)
    for t in range(trials):
        ts = trial_seed(seed, t)
        img = flat_image(FlatModel(n, n, c, sigma, ts))
        hp = Hyperparams(k_s=k_s, d_m=math.inf, sigma0=sigma0, seed=ts)
        vals[t] = density_P_at(img, [(i, j)], hp)[0]
    rep.records = {"trial": np.arange(trials), "P": vals}
    D = delta_sum(i, j, (n, n), k_s)
    mean_th = theory.expected_density_flat(i, j, (n, n), k_s, sigma, center_exact)
    var_th = theory.variance_density_flat(i, j, (n, n), k_s, sigma, sigma0, center_exact)
    rep.extra.update(Delta=D, mean_theory=mean_th, var_theory=var_th)
    if trials < 2:
        return rep
    m = float(vals.mean())
    v = float(vals.var(ddof=1))
    se_m = math.sqrt(v / trials)
    m4 = float(np.mean((vals - m) ** 4))
    se_v = math.sqrt(max(m4 - v * v, 0.0) / trials)
    rep.extra.update(mean_emp=m, var_emp=v, se_mean=se_m, se_var=se_v)
    rep.verdicts.append(Verdict.within("mean of P (standard errors from theory)",
                                       (m - mean_th) / se_m, -n_se, n_se))
    rep.verdicts.append(Verdict.within("variance of P (standard errors from theory)",
                                       (v - var_th) / se_v, -n_se, n_se))
    lo = theory.variance_lower_bound(D, k_s, sigma)
    hi = theory.variance_upper_bound(sigma)
    vb = Verdict.within("variance of P within [sigma^4 Delta^2/k_s^4, 107 sigma^4]", v, lo, hi)
    if not ok:
        vb.passed, vb.note = None, "hypothesis unmet"
    rep.verdicts.append(vb)
    return rep
