"""
End-to-end runs behind the CLI subcommands

Two preprocessing paths share one pipeline:
- series (CSV): standardize -> similarity (inverse Euclidean by default)
- frames (FSK1): optional ROI -> centre rows -> truncated-SVD denoise ->
  cosine similarity, with MDS and the overlap diagnostic in the report

Cluster means are always averaged over the (standardized) input rows, never
over the denoised ones.
"""

import errno
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .. import __version__
from ..core import lowrank
from ..core.analysis import (
    Assignment,
    ClusterReport,
    assignment_from_labels,
    classical_mds,
    cluster_minima,
    decode,
    ensemble_average,
    rmse,
)
from ..core.annealer import AnnealParams, SolveResult, brute_force, default_params, solve, with_overrides
from ..core.baselines import kmeans_best_of
from ..core.qubo import QuboModel, auto_lambda, build, energy_breakdown, export_json
from ..core.similarity import SimilarityKind, SimilarityMatrix, angular_distance, compute_similarity
from ..data.dataset_io import (
    Dataset,
    center_rows,
    crop_region,
    read_input,
    standardize,
    write_csv,
    write_frame_stack,
    write_frames,
)
from ..data.synthkarman import SynthSpec, clean_signal, generate
from ..utils.config import Config
from ..utils.errors import ConfigError, DiagnosticError, InputError
from ..utils.helpers import canonical_json, dumps_report, ensure_directory, format_timestamp, text_digest
from ..utils.logger import get_logger
from .evaluation import overlap_diagnostic, run_eval
from .run_config import RunConfig

logger = get_logger(__name__)

DEBUG_CHECK_INTERVAL = 1000
DIGEST_EXCLUDED = ("created_at", "report_digest")


@dataclass
class Prepared:
    """Input data after preprocessing"""
    dataset: Dataset      # input rows after standardization; means average these
    features: Dataset     # what similarities / k-means see
    config: RunConfig     # with input-dependent defaults filled in


def _single_input(cfg: RunConfig) -> str:
    if len(cfg.inputs) != 1:
        raise ConfigError(f"{cfg.subcommand} takes exactly one input, got {len(cfg.inputs)}")
    return cfg.inputs[0]


def resolve_defaults(cfg: RunConfig, d: Dataset, config: Config) -> RunConfig:
    """Fill settings left open by the user from the input type and config"""
    frames = d.frame_shape is not None
    metric = cfg.metric or ("cosine" if frames else "inv-euclid")
    updates = {
        "metric": metric,
        "standardize": cfg.standardize or ("none" if frames else "row"),
        "center": cfg.center if cfg.center is not None else metric == "cosine",
        "svd_rank": cfg.svd_rank if cfg.svd_rank is not None else (
            config.default_svd_rank if frames and cfg.subcommand != "baseline" else 0
        ),
        "n_init": cfg.n_init or config.kmeans_n_init,
        "max_iter": cfg.max_iter or config.kmeans_max_iter,
        "threads": cfg.threads if cfg.threads is not None else config.threads,
    }
    if cfg.roi is not None and not frames:
        raise InputError("--roi applies to frame datasets only")
    return cfg.model_copy(update=updates)


def prepare(cfg: RunConfig, config: Config, path: Optional[str] = None) -> Prepared:
    """Load the input and apply the configured preprocessing chain"""
    raw = read_input(path or _single_input(cfg), has_labels=cfg.labels, header=cfg.header)
    cfg = resolve_defaults(cfg, raw, config)

    dataset = standardize(raw, cfg.standardize)
    features = crop_region(dataset, cfg.roi) if cfg.roi else dataset
    if cfg.center:
        features = center_rows(features)

    if cfg.dump_spectrum:
        spectrum = lowrank.singular_values(features, gram_ratio=config.gram_ratio)
        write_csv(spectrum[:, None], cfg.dump_spectrum, columns=["singular_value"])
        logger.info(f"Singular spectrum written to {cfg.dump_spectrum}")

    if cfg.svd_rank:
        features = lowrank.denoise(features, cfg.svd_rank, gram_ratio=config.gram_ratio)

    for note in dataset.warnings:
        logger.warning(note)
    return Prepared(dataset=dataset, features=features, config=cfg)


def resolve_lambdas(cfg: RunConfig, s: SimilarityMatrix) -> Tuple[float, float]:
    """Explicit values win; anything missing comes from the auto rule"""
    lambda1, lambda2 = cfg.lambda1, cfg.lambda2
    if lambda1 is None or (lambda2 is None and not cfg.no_balance):
        auto1, auto2 = auto_lambda(s, cfg.k, cfg.lambda_regime)
        lambda1 = auto1 if lambda1 is None else lambda1
        lambda2 = auto2 if lambda2 is None else lambda2
    if cfg.no_balance:
        lambda2 = 0.0
    return float(lambda1), float(lambda2)


def anneal_params(cfg: RunConfig, model: QuboModel, config: Config) -> AnnealParams:
    base = default_params(
        model,
        seed=cfg.seed,
        restarts=cfg.restarts or config.default_restarts,
        work_budget=config.work_budget,
        sweeps_per_variable=config.sweeps_per_variable,
        max_sweeps=config.max_sweeps,
    )
    params, applied = with_overrides(
        base,
        sweeps=cfg.sweeps,
        move_set=cfg.move_set,
        t_initial=cfg.t_initial,
        t_final=cfg.t_final,
        threads=cfg.threads or None,
        check_interval=DEBUG_CHECK_INTERVAL if cfg.debug else None,
    )
    logger.debug(f"solver overrides: {applied}")
    return params


def read_solution(path: str, n_vars: int) -> np.ndarray:
    """Bitstring from a file: "0101...", whitespace/comma separated bits, or a JSON list"""
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(errno.ENOENT, "solution file not found", str(source))
    text = source.read_text(encoding="utf-8").strip()
    try:
        if text.startswith("["):
            values = [int(v) for v in json.loads(text)]
        else:
            values = [int(ch) for ch in text.replace(",", " ").replace("\n", " ").replace(" ", "")]
    except ValueError as e:
        raise InputError(f"solution file is not a bitstring: {e}", path=str(source)) from e
    if len(values) != n_vars or any(v not in (0, 1) for v in values):
        raise InputError(
            f"solution must hold {n_vars} bits of 0/1, got {len(values)} values",
            path=str(source), n_vars=n_vars,
        )
    return np.array(values, dtype=np.int8)


def _minimize(cfg: RunConfig, model: QuboModel, config: Config) -> Tuple[np.ndarray, Dict[str, Any]]:
    if cfg.solution:
        bits = read_solution(cfg.solution, model.n_vars)
        return bits, {"solver": "external", "path": cfg.solution}

    if cfg.solver == "brute-force":
        result: SolveResult = brute_force(model)
        return result.best_bits, {**result.to_dict()}

    params = anneal_params(cfg, model, config)
    result = solve(model, params)
    return result.best_bits, {**params.to_dict(), **result.to_dict()}


def _diagnostics(report: ClusterReport, s: SimilarityMatrix) -> Optional[float]:
    """MDS of the angular distance plus the overlap diagnostic (cosine only)"""
    if s.kind is not SimilarityKind.COSINE:
        return None
    report.mds = classical_mds(angular_distance(s))
    try:
        return overlap_diagnostic(report.mds, report.assignment)
    except DiagnosticError as e:
        logger.warning(f"overlap diagnostic skipped: {e}")
        return None


def _dump_outputs(cfg: RunConfig, report: ClusterReport, prepared: Prepared):
    if cfg.dump_mds and report.mds is not None:
        table = np.column_stack([report.mds, report.assignment.cluster_of])
        write_csv(table, cfg.dump_mds, columns=["x", "y", "cluster"])
    if cfg.dump_means:
        present = report.means[report.mean_present]
        frame_shape = prepared.dataset.frame_shape
        if frame_shape is not None and Path(cfg.dump_means).suffix.lower() in (".fsk", ".fsk1"):
            write_frame_stack(present, frame_shape, cfg.dump_means)
        else:
            ids = np.flatnonzero(report.mean_present)
            columns = ["cluster"] + [f"x{j}" for j in range(present.shape[1])]
            write_csv(np.column_stack([ids, present]), cfg.dump_means, columns=columns)
        logger.info(f"Cluster means written to {cfg.dump_means}")


def finalize_report(document: Dict[str, Any]) -> Dict[str, Any]:
    """Stamp creation time and the digest of everything else"""
    body = {key: value for key, value in document.items() if key not in DIGEST_EXCLUDED}
    document = dict(body)
    document["report_digest"] = text_digest(canonical_json(body))
    document["created_at"] = format_timestamp()
    return document


def _base_document(kind: str, cfg: RunConfig, prepared: Prepared) -> Dict[str, Any]:
    return {
        "kind": kind,
        "qubits_version": __version__,
        "config": json.loads(cfg.to_json()),
        "dataset_digest": prepared.dataset.digest(),
        "n": prepared.dataset.n,
        "m": prepared.dataset.m,
        "k": cfg.k,
        "frame_shape": list(prepared.dataset.frame_shape) if prepared.dataset.frame_shape else None,
        "warnings": list(prepared.dataset.warnings),
    }


def write_document(document: Dict[str, Any], output: Optional[str]) -> Optional[Path]:
    if not output:
        return None
    path = ensure_directory(output)
    path.write_text(dumps_report(document) + "\n", encoding="utf-8")
    logger.info(f"Report written to {path}")
    return path


def _require_k(cfg: RunConfig, n: int):
    if cfg.k is None:
        raise ConfigError(f"{cfg.subcommand} needs --k")
    if cfg.k > n:
        raise ConfigError(f"k = {cfg.k} exceeds the {n} samples", k=cfg.k, n=n)


def run_cluster(cfg: RunConfig, config: Optional[Config] = None) -> Tuple[Dict[str, Any], ClusterReport]:
    """
    QUBO clustering of one dataset

    Returns:
        (report document, ClusterReport with means and MDS)
    """
    config = config or Config()
    prepared = prepare(cfg, config)
    cfg = prepared.config
    _require_k(cfg, prepared.dataset.n)

    s = compute_similarity(prepared.features, cfg.metric, epsilon=config.similarity_epsilon)
    if cfg.dump_similarity:
        write_csv(s.values, cfg.dump_similarity)

    lambda1, lambda2 = resolve_lambdas(cfg, s)
    model = build(s, cfg.k, lambda1, lambda2)
    bits, solver_info = _minimize(cfg, model, config)

    assignment = decode(bits, s.n, cfg.k, s)
    report = ensemble_average(prepared.dataset, assignment)
    report.energy = energy_breakdown(s, cfg.k, lambda1, lambda2, bits)
    if prepared.dataset.has_labels:
        rmse(report, prepared.dataset)
    overlap = _diagnostics(report, s)
    if prepared.dataset.frame_shape is not None:
        cluster_minima(report)

    _dump_outputs(cfg, report, prepared)

    if report.outlier_count:
        logger.info(f"{report.outlier_count} point(s) left as outliers")
    document = _base_document("qubo", cfg, prepared)
    document.update({
        "lambda1": lambda1,
        "lambda2": lambda2,
        "solver": solver_info,
        "energy_qubo": float(report.energy.total),
        "assignment": assignment.to_dict(),
        "clusters": report.to_dict(),
        "overlap": overlap,
    })
    document = finalize_report(document)
    write_document(document, cfg.output)
    return document, report


def run_baseline(cfg: RunConfig, config: Optional[Config] = None) -> Tuple[Dict[str, Any], ClusterReport]:
    """k-means++ on the same input, reported in the cluster layout"""
    config = config or Config()
    prepared = prepare(cfg, config)
    cfg = prepared.config
    _require_k(cfg, prepared.dataset.n)

    result = kmeans_best_of(prepared.features, cfg.k, seed=cfg.seed,
                            max_iter=cfg.max_iter, n_init=cfg.n_init)
    assignment = assignment_from_labels(result.assignments, cfg.k)
    report = ensemble_average(prepared.dataset, assignment)
    if prepared.dataset.has_labels:
        rmse(report, prepared.dataset)

    overlap = None
    if cfg.metric == "cosine":
        # same angular geometry as the QUBO path so overlaps compare
        diagnostic_cfg = cfg.model_copy(update={"svd_rank": None, "subcommand": "cluster",
                                                "dump_spectrum": None})
        diagnostic = prepare(diagnostic_cfg, config)
        s = compute_similarity(diagnostic.features, "cosine")
        overlap = _diagnostics(report, s)
    if prepared.dataset.frame_shape is not None:
        cluster_minima(report)

    _dump_outputs(cfg, report, prepared)

    document = _base_document("kmeans", cfg, prepared)
    document.update({
        "solver": {
            "solver": "kmeans++",
            "seed": result.seed,
            "n_init": cfg.n_init,
            "max_iter": cfg.max_iter,
            "iterations": result.iterations,
            "converged": result.converged,
            "inertia": result.inertia,
            "inertia_trace": result.inertia_trace,
        },
        "assignment": assignment.to_dict(),
        "clusters": report.to_dict(),
        "overlap": overlap,
    })
    document = finalize_report(document)
    write_document(document, cfg.output)
    return document, report


def run_mds(cfg: RunConfig, config: Optional[Config] = None) -> Dict[str, Any]:
    """Classical MDS of the angular distance between preprocessed rows"""
    config = config or Config()
    cfg = cfg.model_copy(update={"metric": "cosine"})
    prepared = prepare(cfg, config)
    s = compute_similarity(prepared.features, "cosine")
    coords = classical_mds(angular_distance(s))
    radii = np.linalg.norm(coords, axis=1)

    if cfg.dump_mds:
        write_csv(coords, cfg.dump_mds, columns=["x", "y"])
    document = _base_document("mds", prepared.config, prepared)
    document.update({
        "mds": coords.tolist(),
        "radius": {"median": float(np.median(radii)), "mean": float(radii.mean()),
                   "std": float(radii.std())},
    })
    document = finalize_report(document)
    write_document(document, cfg.output)
    return document


def run_synth(cfg: RunConfig) -> Dict[str, Any]:
    """Write a synthetic periodic frame stack (and optionally its truth)"""
    if not cfg.output:
        raise ConfigError("synth needs an output path")
    spec = SynthSpec(
        n_frames=cfg.n_frames, height=cfg.height, width=cfg.width,
        n_periods=cfg.n_periods, amplitude=cfg.amplitude,
        noise_sigma=cfg.noise_sigma, seed=cfg.seed, wavenumber=cfg.wavenumber,
    )
    dataset, phases = generate(spec)
    write_frames(dataset, cfg.output)
    if cfg.phases_path:
        write_csv(phases[:, None], cfg.phases_path, columns=["phase"])
    if cfg.clean_path:
        write_frame_stack(clean_signal(spec), spec.frame_shape, cfg.clean_path)

    return {
        "kind": "synth",
        "output": cfg.output,
        "dataset_digest": dataset.digest(),
        "n_frames": spec.n_frames,
        "frame_shape": list(spec.frame_shape),
        "noise_sigma": spec.sigma,
        "config": json.loads(cfg.to_json()),
    }


def run_qubo_export(cfg: RunConfig, config: Optional[Config] = None) -> Dict[str, Any]:
    """Build the clustering QUBO and write it for an external solver"""
    config = config or Config()
    if not cfg.output:
        raise ConfigError("qubo-export needs an output path")
    prepared = prepare(cfg, config)
    cfg = prepared.config
    _require_k(cfg, prepared.dataset.n)

    s = compute_similarity(prepared.features, cfg.metric, epsilon=config.similarity_epsilon)
    lambda1, lambda2 = resolve_lambdas(cfg, s)
    model = build(s, cfg.k, lambda1, lambda2)
    export_json(model, cfg.output)
    return {
        "kind": "qubo-export",
        "output": cfg.output,
        "dataset_digest": prepared.dataset.digest(),
        "n_vars": model.n_vars,
        "quadratic_terms": int(model.rows.size),
        "lambda1": lambda1,
        "lambda2": lambda2,
    }


def load_report(path: str) -> Dict[str, Any]:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(errno.ENOENT, "report not found", str(source))
    try:
        return json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputError(f"report is not valid JSON: {e}", path=str(source)) from e


def run_eval_files(cfg: RunConfig) -> Dict[str, Any]:
    if len(cfg.inputs) != 2:
        raise ConfigError(f"eval takes two reports, got {len(cfg.inputs)}")
    comparison = run_eval(load_report(cfg.inputs[0]), load_report(cfg.inputs[1]))
    comparison["reports"] = list(cfg.inputs)
    write_document(comparison, cfg.output)
    return comparison
