"""Command-line pipeline driver.

Subcommands cover the full synthetic-to-report path::

    simulate | glm | extract-roi | encode | csaa | stats | report

Configuration comes from an INI-style file (``--config``), every value
overridable by the global flags; flags win. All outputs live under one
run directory (``--out``) in a fixed layout, so each stage finds the
previous stage's files without extra wiring.

Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical error.
"""

import argparse
import configparser
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._svg import Curve, bar_chart, line_chart
from .csaa import OPTION_LABELS, OptionSet, csaa
from .encoding import (
    DEFAULT_ALPHA_GRID,
    EmbeddingTensor,
    EncodingResult,
    LayerScores,
    layer_curve_summary,
    layerwise_encode,
    read_results_tsv,
    result_rows,
    write_results_tsv,
)
from .errors import ConfigError, DataError, NumericalError, PipelineError
from .hrf_glm import lss_betas
from .roi import extract_roi_responses
from .stats import (
    StatsRow,
    asymmetry_performance_association,
    lh_rh_asymmetry,
    one_sample_ttest,
    sign_flip_permutation_test,
    write_stats_tsv,
)
from .synth import SynthSpec, default_events, gen_bold, gen_embeddings, gen_roi_response
from .tensorio import (
    RoiMask,
    RoiMaskSet,
    read_events,
    read_masks,
    read_tensor,
    write_events,
    write_masks,
    write_tensor,
)

# fixed layout under the run directory; [paths] keys override per entry
_LAYOUT = {
    "events": "events.tsv",
    "masks": "masks.tsv",
    "manifest": "manifest.tsv",
    "pairing": "pairing.tsv",
    "truth": "truth",
    "bold": "bold",
    "betas": "betas",
    "responses": "responses",
    "embeddings": "embeddings",
    "rho": "rho",
    "results": "results.tsv",
    "csaa": "csaa",
    "csaa_table": "csaa.tsv",
    "best_layers": "best_layers.tsv",
    "stats": "stats.tsv",
    "report": "report",
}


@dataclass
class RunConfig:
    out: Path = Path("run")
    seed: int = 0
    threads: int = 0        # 0 = use available parallelism
    quiet: bool = False
    # encoding
    k: int = 5
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    fold_seed: int = 0
    global_z: bool = False
    # roi / glm
    aggregator: str = "mean"
    tr: float = None        # None = take the simulated manifest value
    # provenance only, recorded in the manifest
    pooling: str = "mean"
    layer_policy: str = "all"
    # simulate
    n: int = 200
    layers: int = 6
    dim: int = 20
    true_layer: int = 3
    snr: float = 4.0
    noise_sd: float = 0.0
    trial_spacing: float = 8.0
    subjects: int = 2
    voxels_per_roi: int = 4
    models: tuple = ("base", "instruct")
    rois: tuple = ("LH_IFG", "RH_IFG", "LH_PostTemp")
    path_overrides: dict = field(default_factory=dict)

    def path(self, key):
        if key in self.path_overrides:
            return Path(self.path_overrides[key])
        return self.out / _LAYOUT[key]

    def worker_count(self):
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


def _log(config, msg):
    if not config.quiet:
        print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# configuration loading
# ---------------------------------------------------------------------------

def _split_csv(raw):
    items = tuple(s.strip() for s in raw.split(",") if s.strip())
    if not items:
        raise ConfigError(f"empty list value: {raw!r}")
    return items


def load_config(args):
    """RunConfig from defaults <- config file <- flags, later wins."""
    # the shared flags use SUPPRESS defaults (so a value given before the
    # subcommand is not clobbered by the subparser); absent means not given
    conf_path = getattr(args, "config", None)
    cp = configparser.ConfigParser()
    if conf_path:
        if not os.path.isfile(conf_path):
            raise ConfigError(f"config file not found: {conf_path}")
        cp.read(conf_path)

    cfg = RunConfig()
    try:
        if cp.has_option("paths", "out"):
            cfg.out = Path(cp.get("paths", "out"))
        for key in _LAYOUT:
            if cp.has_option("paths", key):
                cfg.path_overrides[key] = cp.get("paths", key)
        enc = cp["encoding"] if cp.has_section("encoding") else {}
        if "k" in enc:
            cfg.k = int(enc["k"])
        if "alpha_grid" in enc:
            cfg.alpha_grid = tuple(float(v) for v in _split_csv(enc["alpha_grid"]))
        if "fold_seed" in enc:
            cfg.fold_seed = int(enc["fold_seed"])
        if "global_z" in enc:
            cfg.global_z = enc["global_z"].strip().lower() in ("1", "true", "yes")
        if cp.has_option("roi", "aggregator"):
            cfg.aggregator = cp.get("roi", "aggregator")
        if cp.has_option("glm", "tr"):
            cfg.tr = float(cp.get("glm", "tr"))
        sim = cp["simulate"] if cp.has_section("simulate") else {}
        for key in ("n", "layers", "dim", "true_layer", "subjects",
                    "voxels_per_roi"):
            if key in sim:
                setattr(cfg, key, int(sim[key]))
        for key in ("snr", "noise_sd", "trial_spacing"):
            if key in sim:
                setattr(cfg, key, float(sim[key]))
        if "tr" in sim:
            cfg.tr = float(sim["tr"])
        if "models" in sim:
            cfg.models = _split_csv(sim["models"])
        if "rois" in sim:
            cfg.rois = _split_csv(sim["rois"])
        run = cp["run"] if cp.has_section("run") else {}
        if "seed" in run:
            cfg.seed = int(run["seed"])
        if "threads" in run:
            cfg.threads = int(run["threads"])
        if "pooling" in run:
            cfg.pooling = run["pooling"]
        if "layer_policy" in run:
            cfg.layer_policy = run["layer_policy"]
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc

    out = getattr(args, "out", None)
    if out is not None:
        cfg.out = Path(out)
    seed = getattr(args, "seed", None)
    if seed is not None:
        cfg.seed = seed
    threads = getattr(args, "threads", None)
    if threads is not None:
        cfg.threads = threads
    cfg.quiet = bool(getattr(args, "quiet", False))

    if cfg.k < 2:
        raise ConfigError(f"k must be >= 2, got {cfg.k}")
    if any(a < 0 for a in cfg.alpha_grid):
        raise ConfigError("alpha_grid values must be >= 0")
    if cfg.seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    return cfg


def _require_inputs(config, keys):
    """Fail before any output is touched if an input path is missing."""
    missing = [str(config.path(k)) for k in keys if not config.path(k).exists()]
    if missing:
        raise ConfigError("missing input path(s): " + ", ".join(missing))


def _read_manifest(config):
    path = config.path("manifest")
    if not path.is_file():
        return {}
    out = {}
    for line in path.read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("\t")
            out[key] = value
    return out


def _resolve_tr(config):
    if config.tr is not None:
        return config.tr
    manifest = _read_manifest(config)
    return float(manifest.get("tr", 2.0))


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _base_spec(config):
    return SynthSpec(
        n=config.n, n_layers=config.layers, dim=config.dim,
        true_layer=config.true_layer, snr=config.snr, seed=config.seed,
        tr=config.tr if config.tr is not None else 2.0,
        trial_spacing=config.trial_spacing, noise_sd=config.noise_sd,
    )


def _subject_ids(config):
    return [f"sub{j + 1:02d}" for j in range(config.subjects)]


def cmd_simulate(config):
    """Write a complete synthetic fixture tree under the run directory."""
    if config.subjects < 1:
        raise ConfigError("subjects must be >= 1")
    if len(set(config.models)) != len(config.models):
        raise ConfigError("duplicate model ids")
    try:
        spec = _base_spec(config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    masks = []
    for i, key in enumerate(config.rois):
        hemi, _, name = key.partition("_")
        lo = i * config.voxels_per_roi
        masks.append(RoiMask(name, hemi, tuple(range(lo, lo + config.voxels_per_roi))))
    mask_set = RoiMaskSet(masks)  # validates names before anything is written
    n_voxels = len(config.rois) * config.voxels_per_roi

    out = config.out
    for key in ("truth", "bold", "embeddings"):
        config.path(key).mkdir(parents=True, exist_ok=True)
    events = default_events(spec)
    write_events(config.path("events"), events)
    write_masks(config.path("masks"), mask_set)

    # one embedding tensor per model; the last model carries the signal
    embs = {}
    for m, model in enumerate(config.models):
        emb = gen_embeddings(replace(spec, seed=config.seed + m), model_id=model)
        embs[model] = emb
        write_tensor(config.path("embeddings") / f"{model}.nat", emb.values)
    true_model = config.models[-1]

    truth_rows = []
    for s, subject in enumerate(_subject_ids(config)):
        amplitudes = np.zeros((config.n, n_voxels))
        for r, mask in enumerate(mask_set):
            cell_spec = replace(spec, seed=config.seed + 1000 + 100 * s + r)
            resp, truth = gen_roi_response(
                cell_spec, embs[true_model], subject_id=subject,
                roi_name=mask.name, hemisphere=mask.hemisphere,
            )
            amplitudes[:, list(mask.voxel_indices)] = resp.values[:, None]
            truth_rows.append((subject, mask.key, truth.true_layer, true_model))
        bold = gen_bold(events, amplitudes,
                        replace(spec, seed=config.seed + 5000 + s))
        write_tensor(config.path("bold") / f"{subject}.nat", bold.values)
        write_tensor(config.path("truth") / f"amplitudes_{subject}.nat",
                     amplitudes)
        _log(config, f"simulate: {subject} bold {bold.values.shape}")

    with open(config.path("truth") / "cells.tsv", "w") as fh:
        fh.write("subject\troi\ttrue_layer\tmodel\n")
        for row in truth_rows:
            fh.write("\t".join(str(v) for v in row) + "\n")

    if len(config.models) == 2:
        with open(config.path("pairing"), "w") as fh:
            fh.write("instruct\tbase\n")
            fh.write(f"{config.models[1]}\t{config.models[0]}\n")

    manifest = {
        "version": __version__, "seed": config.seed, "n": config.n,
        "layers": config.layers, "dim": config.dim,
        "true_layer": config.true_layer, "snr": config.snr,
        "noise_sd": config.noise_sd, "tr": spec.tr,
        "trial_spacing": config.trial_spacing,
        "subjects": config.subjects, "models": ",".join(config.models),
        "rois": ",".join(config.rois), "pooling": config.pooling,
        "layer_policy": config.layer_policy,
    }
    with open(config.path("manifest"), "w") as fh:
        for key in sorted(manifest):
            fh.write(f"{key}\t{manifest[key]}\n")
    _log(config, f"simulate: fixture written to {out}")


# ---------------------------------------------------------------------------
# glm / extract-roi
# ---------------------------------------------------------------------------

def cmd_glm(config):
    """Single-trial betas per subject from BOLD plus the event table."""
    _require_inputs(config, ("events", "bold"))
    events = read_events(config.path("events"))
    tr = _resolve_tr(config)
    bold_files = sorted(config.path("bold").glob("*.nat"))
    if not bold_files:
        raise DataError(f"no BOLD files in {config.path('bold')}")
    config.path("betas").mkdir(parents=True, exist_ok=True)
    for path in bold_files:
        betas = lss_betas(events, read_tensor(path), tr=tr)
        write_tensor(config.path("betas") / path.name, betas.values)
        _log(config, f"glm: {path.stem} betas {betas.values.shape}")


def cmd_extract_roi(config):
    """Aggregate per-voxel betas into one response vector per mask."""
    _require_inputs(config, ("betas", "masks"))
    masks = read_masks(config.path("masks"))
    beta_files = sorted(config.path("betas").glob("*.nat"))
    if not beta_files:
        raise DataError(f"no beta files in {config.path('betas')}")
    config.path("responses").mkdir(parents=True, exist_ok=True)
    for path in beta_files:
        if "_" in path.stem:
            raise DataError(f"subject id {path.stem!r} must not contain '_'")
        values = read_tensor(path)
        responses = extract_roi_responses(values, masks, path.stem,
                                          aggregator=config.aggregator)
        for resp in responses:
            write_tensor(config.path("responses") / f"{resp.subject_id}_{resp.key}.nat",
                         resp.values)
        _log(config, f"extract-roi: {path.stem} -> {len(responses)} responses")


# ---------------------------------------------------------------------------
# encode
# ---------------------------------------------------------------------------

def _load_responses(config):
    out = {}
    for path in sorted(config.path("responses").glob("*.nat")):
        subject, _, roi_key = path.stem.partition("_")
        if not roi_key:
            raise DataError(f"unparseable response filename: {path.name}")
        out[(subject, roi_key)] = (path, read_tensor(path))
    if not out:
        raise DataError(f"no responses in {config.path('responses')}")
    return out


def cmd_encode(config):
    """Fan layerwise scoring out over every (model, subject, roi) cell."""
    _require_inputs(config, ("embeddings", "responses"))
    embs = {}
    for path in sorted(config.path("embeddings").glob("*.nat")):
        embs[path.stem] = (path, EmbeddingTensor(path.stem, read_tensor(path)))
    if not embs:
        raise DataError(f"no embeddings in {config.path('embeddings')}")
    responses = _load_responses(config)

    # validate every pairing up front; nothing is written on failure
    for model, (epath, emb) in sorted(embs.items()):
        for (subject, roi_key), (rpath, y) in sorted(responses.items()):
            if y.shape[0] != emb.n_sentences:
                raise DataError(
                    f"{rpath.name} has {y.shape[0]} trials but "
                    f"{epath.name} has {emb.n_sentences} sentences"
                )

    cells = sorted(
        (model, subject, roi_key)
        for model in embs
        for (subject, roi_key) in responses
    )

    def run_cell(cell):
        model, subject, roi_key = cell
        return layerwise_encode(embs[model][1], responses[(subject, roi_key)][1],
                                k=config.k, alpha_grid=config.alpha_grid,
                                seed=config.fold_seed,
                                global_z=config.global_z)

    workers = config.worker_count()
    _log(config, f"encode: {len(cells)} cells on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        scored = dict(zip(cells, pool.map(run_cell, cells)))

    # single-threaded ordered merge; output independent of worker count
    config.path("rho").mkdir(parents=True, exist_ok=True)
    rows = []
    for model in sorted(embs):
        cells_for_model = {
            (subject, roi_key): scored[(model, subject, roi_key)]
            for (subject, roi_key) in sorted(responses)
        }
        result = EncodingResult(model_id=model, cells=cells_for_model)
        rows.extend(result_rows(result))
        for (subject, roi_key), scores in cells_for_model.items():
            write_tensor(
                config.path("rho") / f"{model}_{subject}_{roi_key}.nat",
                scores.rho,
            )
    write_results_tsv(config.path("results"), sorted(rows))
    _log(config, f"encode: {len(rows)} rows -> {config.path('results')}")


# ---------------------------------------------------------------------------
# csaa
# ---------------------------------------------------------------------------

def cmd_csaa(config):
    """Score the option trees under <csaa>/<model>/ into one table."""
    _require_inputs(config, ("csaa",))
    root = config.path("csaa")
    model_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not model_dirs:
        raise DataError(f"no model directories in {root}")

    table = []
    for mdir in model_dirs:
        source_dir = mdir / "source"
        option_dir = mdir / "options"
        items = sorted(p.stem for p in source_dir.glob("*.nat"))
        if not items:
            raise DataError(f"{mdir.name}: no source embeddings")
        option_sets = []
        for item in items:
            source = read_tensor(source_dir / f"{item}.nat")
            options = []
            for label in OPTION_LABELS:
                opath = option_dir / f"{item}_{label}.nat"
                if not opath.is_file():
                    raise DataError(f"item {item!r}: missing option {label}")
                options.append(read_tensor(opath))
            option_sets.append(OptionSet(item, source, np.stack(options)))
        result = csaa(option_sets)
        table.append((mdir.name, result.n, result.csaa))
        _log(config, f"csaa: {mdir.name} {result.csaa:.4f} over {result.n}")

    with open(config.path("csaa_table"), "w") as fh:
        fh.write("model\tn\tcsaa\tpct\n")
        for model, n, acc in table:
            fh.write(f"{model}\t{n}\t{acc!r}\t{(100.0 * acc)!r}\n")


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------

def _best_rows(rows):
    """Collapse layer rows to each cell's best layer, ties to the earlier."""
    best = {}
    for r in rows:
        key = (r.model, r.subject, r.roi)
        cur = best.get(key)
        if cur is None or (r.rho, -r.layer) > (cur.rho, -cur.layer):
            best[key] = r
    return best


def _roi_pairs(rows):
    names = {r.roi for r in rows}
    pairs = []
    for key in sorted(names):
        if key.startswith("LH_") and ("RH_" + key[3:]) in names:
            pairs.append((key, "RH_" + key[3:]))
    return pairs


def _read_pairing(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    body = lines[1:] if lines and lines[0].startswith("instruct") else lines
    pairs = []
    for ln in body:
        parts = ln.split("\t")
        if len(parts) != 2:
            raise DataError(f"pairing line needs 2 fields: {ln!r}")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise DataError(f"pairing file {path} is empty")
    return pairs


def _read_csaa_table(path):
    out = {}
    lines = Path(path).read_text().splitlines()
    for ln in lines[1:]:
        if ln.strip():
            model, _, acc, _ = ln.split("\t")
            out[model] = float(acc)
    return out


def cmd_stats(config):
    """Best-layer table plus the inferential rows: pairing permutation
    test, per-model asymmetry t-tests, asymmetry/performance link."""
    _require_inputs(config, ("results",))
    rows = read_results_tsv(config.path("results"))
    models = sorted({r.model for r in rows})
    best = _best_rows(rows)

    with open(config.path("best_layers"), "w") as fh:
        fh.write("model\tsubject\troi\tlayer\trho\n")
        for key in sorted(best):
            r = best[key]
            fh.write(f"{r.model}\t{r.subject}\t{r.roi}\t{r.layer}\t{r.rho!r}\n")

    stats_rows = []
    if config.path("pairing").is_file():
        for instr, base in _read_pairing(config.path("pairing")):
            for m in (instr, base):
                if m not in models:
                    raise DataError(f"pairing names unknown model {m!r}")
            units = sorted(
                {(s, roi) for (mm, s, roi) in best if mm == instr}
                & {(s, roi) for (mm, s, roi) in best if mm == base}
            )
            d = np.array([
                best[(instr, s, roi)].rho - best[(base, s, roi)].rho
                for s, roi in units
            ])
            res = sign_flip_permutation_test(d, sidedness="one",
                                             seed=config.seed)
            stats_rows.append(StatsRow(
                f"perm:{instr}>{base}", "subject_roi",
                res.statistic, res.p_value, res.n, res.sidedness,
            ))

    pairs = _roi_pairs(rows)
    for model in models:
        mrows = [r for r in rows if r.model == model]
        if not pairs or len({r.subject for r in mrows}) < 2:
            continue
        series = lh_rh_asymmetry(mrows, pairs, per="subject")
        for (lh, rh), s in sorted(series.items()):
            t = one_sample_ttest(s.values)
            stats_rows.append(StatsRow(
                f"asym:{model}:{lh}-{rh}", "subject",
                t.statistic, t.p_value, t.n, t.sidedness,
            ))

    if config.path("csaa_table").is_file() and len(models) >= 3 and pairs:
        perf = _read_csaa_table(config.path("csaa_table"))
        series = lh_rh_asymmetry(rows, pairs, per="model")
        links = asymmetry_performance_association(series, perf)
        for (lh, rh), res in sorted(links.items()):
            stats_rows.append(StatsRow(
                f"asym-vs-csaa:{lh}-{rh}", "model",
                res.statistic, res.p_value, res.n, res.sidedness,
            ))

    write_stats_tsv(config.path("stats"), stats_rows)
    _log(config, f"stats: {len(stats_rows)} rows -> {config.path('stats')}")


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _result_from_rows(model, rows):
    cells = {}
    for r in rows:
        if r.model == model:
            cells.setdefault((r.subject, r.roi), {})[r.layer] = r
    packed = {}
    for cell, by_layer in sorted(cells.items()):
        layers = sorted(by_layer)
        rho = np.array([by_layer[l].rho for l in layers])
        alphas = np.array([[by_layer[l].alpha] for l in layers])
        packed[cell] = LayerScores(rho=rho, fold_corrs=np.zeros((len(layers), 0)),
                                   fold_alphas=alphas)
    return EncodingResult(model_id=model, cells=packed)


def cmd_report(config):
    """Layer-curve charts with CI bands plus asymmetry and CSAA bars."""
    _require_inputs(config, ("results",))
    rows = read_results_tsv(config.path("results"))
    models = sorted({r.model for r in rows})
    if len({r.subject for r in rows}) < 2:
        raise DataError("report needs at least 2 subjects for CI curves")

    report_dir = config.path("report")
    report_dir.mkdir(parents=True, exist_ok=True)

    curve_rows = []
    for model in models:
        result = _result_from_rows(model, rows)
        summary = layer_curve_summary(result)
        curve_rows.extend(summary)
        rois = sorted({s["roi"] for s in summary})
        curves = []
        for roi in rois:
            sub = [s for s in summary if s["roi"] == roi]
            curves.append(Curve(
                label=roi,
                x=[s["layer"] for s in sub],
                y=[s["mean"] for s in sub],
                lo=[s["ci_low"] for s in sub],
                hi=[s["ci_high"] for s in sub],
            ))
        svg = line_chart(f"{model}: layer curves (95% CI)", curves,
                         x_label="layer", y_label="mean rho")
        (report_dir / f"layer_curves_{model}.svg").write_text(svg)

    with open(report_dir / "layer_curves.tsv", "w") as fh:
        fh.write("model\troi\tlayer\tmean\tci_low\tci_high\tn\n")
        for s in curve_rows:
            fh.write(f"{s['model']}\t{s['roi']}\t{s['layer']}\t"
                     f"{s['mean']!r}\t{s['ci_low']!r}\t{s['ci_high']!r}\t"
                     f"{s['n']}\n")

    # peak summary in both subject-aggregation orders, since they need
    # not agree: mean of per-subject best-layer rho, and the peak of the
    # subject-mean curve
    by_cell = {}
    for r in rows:
        by_cell.setdefault((r.model, r.roi), {}).setdefault(
            r.subject, {})[r.layer] = r.rho
    with open(report_dir / "best_layer_orders.tsv", "w") as fh:
        fh.write("model\troi\tbest_then_mean\t"
                 "mean_then_best_layer\tmean_then_best_rho\n")
        for (model, roi) in sorted(by_cell):
            per_subj = by_cell[(model, roi)]
            best_then_mean = float(np.mean([
                max(curve.items(), key=lambda kv: (kv[1], -kv[0]))[1]
                for curve in per_subj.values()
            ]))
            layers = sorted(next(iter(per_subj.values())))
            mean_curve = {
                l: float(np.mean([per_subj[s][l] for s in sorted(per_subj)]))
                for l in layers
            }
            peak = max(layers, key=lambda l: (mean_curve[l], -l))
            fh.write(f"{model}\t{roi}\t{best_then_mean!r}\t{peak}\t"
                     f"{mean_curve[peak]!r}\n")

    pairs = _roi_pairs(rows)
    if pairs:
        labels, values = [], []
        for model in models:
            series = lh_rh_asymmetry([r for r in rows if r.model == model],
                                     pairs, per="subject")
            for (lh, rh), s in sorted(series.items()):
                labels.append(f"{model}:{lh[3:]}")
                values.append(float(np.mean(s.values)))
        svg = bar_chart("mean LH-RH asymmetry", labels, values,
                        y_label="rho difference")
        (report_dir / "asymmetry.svg").write_text(svg)
        with open(report_dir / "asymmetry.tsv", "w") as fh:
            fh.write("bar\tmean_diff\n")
            for label, v in zip(labels, values):
                fh.write(f"{label}\t{v!r}\n")

    if config.path("csaa_table").is_file():
        perf = _read_csaa_table(config.path("csaa_table"))
        order = sorted(perf, key=lambda m: (-perf[m], m))
        svg = bar_chart("CSAA ranking", order, [perf[m] for m in order],
                        y_label="accuracy")
        (report_dir / "csaa.svg").write_text(svg)
        with open(report_dir / "csaa_rank.tsv", "w") as fh:
            fh.write("model\tcsaa\n")
            for m in order:
                fh.write(f"{m}\t{perf[m]!r}\n")
    _log(config, f"report: written to {report_dir}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "simulate": cmd_simulate,
    "glm": cmd_glm,
    "extract-roi": cmd_extract_roi,
    "encode": cmd_encode,
    "csaa": cmd_csaa,
    "stats": cmd_stats,
    "report": cmd_report,
}


def _parser():
    # SUPPRESS keeps the subparser from clobbering a value that was
    # already parsed before the subcommand; main() fills the defaults in
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config file",
                        default=argparse.SUPPRESS)
    common.add_argument("--out", metavar="DIR", help="run directory",
                        default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, metavar="U64",
                        default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, metavar="N",
                        default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true",
                        default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(
        prog="brainalign",
        description="synthetic brain-to-embedding alignment pipeline",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        sub.add_parser(name, parents=[common],
                       help=fn.__doc__.splitlines()[0].lower())
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        config = load_config(args)
        _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
