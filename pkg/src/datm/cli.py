"""Command-line pipeline: preprocess, fit, sweep, infer, topics, project,
analyze, and synth.

Stages communicate through files under each command's --out directory with
fixed names recorded in that directory's MANIFEST.json, which also carries
run provenance (tool version, config hash, timestamp, artifact checksums).
Data artifacts themselves contain no timestamps so reruns with the same
seed are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (Document, filter_documents, merge_phrases, read_corpus,
                     read_tokens, term_counts, tokenize, windows, write_tokens)
from .dictionary import fit, load_model, save_model
from .dimensions import build_dimension, prevalence_ratio, project_topics, spearman
from .embeddings import load_embedding, write_counts
from .errors import ConfigError, DataError, DatmError
from .gist import SifWeights, estimate_global_context
from .metrics import coverage, diversity, knee_candidate, coherence as coherence_of
from .metrics import sweep as run_sweep
from .synth import generate, write_synth
from .topics import (code_document, interpret_topics, read_assignments,
                     read_labels, write_assignments, write_topics)

MANIFEST_NAME = "MANIFEST.json"

# which command produces each fixed artifact name, for error messages
PRODUCERS = {
    "tokens.jsonl": "datm preprocess",
    "counts.tsv": "datm preprocess or datm synth",
    "model.json": "datm fit",
    "atoms.tsv": "datm fit",
    "codes.tsv": "datm fit",
    "assignments.jsonl": "datm infer",
    "loadings.tsv": "datm project",
    "embedding.txt": "datm synth",
    "corpus.jsonl": "datm synth",
}


# ---------------------------------------------------------------------------
# config plumbing

def parse_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key=value`` file; blank lines and # comments are ignored."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno} is not key=value: {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _coerce(raw: str, kind):
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"expected {kind.__name__}, got {raw!r}") from None


class Settings:
    """CLI value > config-file value > built-in default."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self._args = vars(args)
        self._config = config

    def get(self, key: str, kind, default=None, required: bool = False):
        value = self._args.get(key)
        if value is None and key in self._config:
            value = _coerce(self._config[key], kind)
        if value is None:
            value = default
        if value is None and required:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
        return value


def _positive(name: str, value, minimum=1):
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


# ---------------------------------------------------------------------------
# artifact plumbing

def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(settings: dict) -> str:
    return hashlib.sha256(
        json.dumps(settings, sort_keys=True, default=str).encode()
    ).hexdigest()[:16]


def atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(out_dir: Path, command: str, cfg_hash: str,
                   artifacts: list[str]) -> None:
    manifest_path = out_dir / MANIFEST_NAME
    manifest = {"runs": [], "artifacts": {}}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest["runs"].append({
        "command": command,
        "version": __version__,
        "config_hash": cfg_hash,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    })
    for name in artifacts:
        path = out_dir / name
        manifest["artifacts"][name] = {
            "sha256": _sha256(path),
            "bytes": path.stat().st_size,
            "config_hash": cfg_hash,
            "version": __version__,
        }
    atomic_write_text(manifest_path, json.dumps(manifest, indent=2) + "\n")


def require_input(path: str | Path) -> Path:
    """Check an input artifact exists and matches its manifest checksum."""
    path = Path(path)
    if not path.exists():
        producer = PRODUCERS.get(path.name)
        hint = f"; produce it with `{producer}`" if producer else ""
        raise DataError(f"missing input {path}{hint}")
    manifest_path = path.parent / MANIFEST_NAME
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        entry = manifest.get("artifacts", {}).get(path.name)
        if entry and entry["sha256"] != _sha256(path):
            raise DataError(
                f"{path} does not match its manifest checksum; "
                f"re-run the producing command"
            )
    return path


def _out_dir(settings: Settings) -> Path:
    out = Path(settings.get("out", str, required=True))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _provenance(cfg_hash: str) -> dict:
    return {"config_hash": cfg_hash, "tool_version": __version__}


def _load_store(settings: Settings):
    embedding = require_input(settings.get("embedding", str, required=True))
    counts = settings.get("counts", str)
    min_count = settings.get("min_count", int, 15)
    if min_count < 0:
        raise ConfigError("min_count must be >= 0")
    return load_embedding(embedding, min_count,
                          require_input(counts) if counts else None)


# ---------------------------------------------------------------------------
# commands

def cmd_preprocess(settings: Settings) -> None:
    out = _out_dir(settings)
    corpus_path = require_input(settings.get("corpus", str, required=True))
    min_terms = settings.get("min_terms", int, 50)
    threshold = settings.get("phrase_threshold", float, 10.0)
    min_pair = _positive("min_pair_count", settings.get("min_pair_count", int, 5), 0)
    passes = _positive("phrase_passes", settings.get("phrase_passes", int, 2))

    docs = [Document(doc_id, tuple(tokenize(text)))
            for doc_id, text in read_corpus(corpus_path)]
    total = len(docs)
    if total:
        docs = merge_phrases(docs, threshold, min_pair, passes)
        kept = filter_documents(docs, min_terms)
    else:
        print("warning: empty corpus", file=sys.stderr)
        kept = []
    write_tokens(kept, out / "tokens.jsonl")
    write_counts(term_counts(kept), out / "counts.tsv")

    cfg = config_hash({"cmd": "preprocess", "min_terms": min_terms,
                       "threshold": threshold, "min_pair_count": min_pair,
                       "passes": passes})
    write_manifest(out, "preprocess", cfg, ["tokens.jsonl", "counts.tsv"])
    print(f"documents kept: {len(kept)} / {total} "
          f"(dropped {total - len(kept)} below {min_terms} terms)")


def _fit_params(settings: Settings):
    return {
        "t0": _positive("t0", settings.get("t0", int, 5)),
        "max_iter": _positive("max_iter", settings.get("max_iter", int, 10)),
        "seed": settings.get("seed", int, 0),
        "sse_stop": settings.get("sse_stop", float, 1e-6),
        "omp_tol_scale": settings.get("omp_tol_scale", float, 1e-9),
        "backend": settings.get("backend", str, "auto"),
    }


def cmd_fit(settings: Settings) -> None:
    k = _positive("k", settings.get("k", int, required=True), 2)
    params = _fit_params(settings)
    top = _positive("top", settings.get("top", int, 25))
    pooled = settings.get("pooled_coherence", bool, False)
    out = _out_dir(settings)
    store = _load_store(settings)

    dictionary, code, report = fit(store, k, **params)
    topics = interpret_topics(dictionary, store, min(top, store.size))
    metrics = {
        "coherence": coherence_of(topics, store, min(top, store.size), pooled),
        "diversity": diversity(topics, min(top, store.size)),
        "coverage": coverage(store, dictionary, code),
        "sse": report.sse_per_iteration[-1],
        "rmse": report.final_rmse,
    }
    cfg = config_hash({"cmd": "fit", "k": k, **params})
    header = {
        "seed": params["seed"],
        "iterations": report.iterations_run,
        "sse_per_iteration": report.sse_per_iteration,
        "reinitialized_atoms": report.reinitialized_atoms,
        "metrics": metrics,
        **_provenance(cfg),
    }
    save_model(out, dictionary, code, list(store.vocab.words), header)
    write_manifest(out, "fit", cfg, ["model.json", "atoms.tsv", "codes.tsv"])
    print(f"fit k={k} t0={params['t0']}: iterations={report.iterations_run} "
          f"sse={metrics['sse']:.6g} coverage={metrics['coverage']:.4f} "
          f"coherence={metrics['coherence']:.4f} diversity={metrics['diversity']:.4f}")


def cmd_sweep(settings: Settings) -> None:
    grid_raw = settings.get("k_grid", str, required=True)
    try:
        k_grid = [int(x) for x in str(grid_raw).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"k_grid must be comma-separated integers, got {grid_raw!r}") from None
    if not k_grid:
        raise ConfigError("k_grid is empty")
    seeds_raw = settings.get("seeds", str)
    seeds = ([int(x) for x in str(seeds_raw).split(",") if x.strip()]
             if seeds_raw else [settings.get("seed", int, 0)])
    t0 = _positive("t0", settings.get("t0", int, 5))
    max_iter = _positive("max_iter", settings.get("max_iter", int, 10))
    top = _positive("top", settings.get("top", int, 25))
    backend = settings.get("backend", str, "auto")
    pooled = settings.get("pooled_coherence", bool, False)
    out = _out_dir(settings)
    store = _load_store(settings)

    reports, failures = run_sweep(store, k_grid, t0, max_iter, seeds,
                                  min(top, store.size), backend, pooled)
    lines = ["k\tt0\tseed\tcoherence\tdiversity\tcoverage\tsse\trmse"]
    for r in reports:
        lines.append(f"{r.k}\t{r.t0}\t{r.seed}\t{r.coherence:.17g}\t{r.diversity:.17g}"
                     f"\t{r.coverage:.17g}\t{r.sse:.17g}\t{r.rmse:.17g}")
    atomic_write_text(out / "sweep.tsv", "\n".join(lines) + "\n")
    cfg = config_hash({"cmd": "sweep", "k_grid": k_grid, "seeds": seeds,
                       "t0": t0, "max_iter": max_iter})
    write_manifest(out, "sweep", cfg, ["sweep.tsv"])

    for r in reports:
        print(f"k={r.k} seed={r.seed}: coherence={r.coherence:.4f} "
              f"diversity={r.diversity:.4f} coverage={r.coverage:.4f} rmse={r.rmse:.6g}")
    for k, seed, message in failures:
        print(f"k={k} seed={seed}: FAILED ({message})", file=sys.stderr)
    if len(reports) >= 3:
        ks = [r.k for r in reports]
        for metric in ("coverage", "sse"):
            candidate = knee_candidate(ks, [getattr(r, metric) for r in reports])
            if candidate is not None:
                print(f"elbow candidate by {metric}: k={candidate}")


def cmd_infer(settings: Settings) -> None:
    window_length = _positive("window", settings.get("window", int, 10))
    stride = _positive("stride", settings.get("stride", int, 1))
    weights = SifWeights(settings.get("a", float, 0.001))
    sample_cap = _positive("sample_cap", settings.get("sample_cap", int, 50_000), 2)
    seed = settings.get("seed", int, 0)
    centered = settings.get("centered_c0", bool, False)
    window_unit = settings.get("window_unit", str, "window")
    count_mode = settings.get("count_mode", str, "window")
    threads = _positive("threads", settings.get("threads", int, 1))
    if window_unit not in ("window", "document"):
        raise ConfigError("window_unit must be 'window' or 'document'")
    if count_mode not in ("window", "run"):
        raise ConfigError("count_mode must be 'window' or 'run'")
    out = _out_dir(settings)
    store = _load_store(settings)
    model_dir = Path(settings.get("model", str, required=True))
    require_input(model_dir / "model.json")
    require_input(model_dir / "atoms.tsv")
    dictionary, _, _, _ = load_model(model_dir)
    if dictionary.dimension != store.dimension:
        raise DataError(f"model dimension {dictionary.dimension} does not match "
                        f"embedding dimension {store.dimension}")
    docs = read_tokens(require_input(settings.get("corpus", str, required=True)))

    if window_unit == "window":
        sample = [w for doc in docs for w in windows(doc, window_length, stride)]
    else:
        sample = [w for doc in docs for w in windows(doc, max(doc.token_count, 1), 1)]
    global_context = estimate_global_context(sample, store, weights, sample_cap,
                                             seed, centered)

    def code(doc):
        return code_document(doc, store, weights, global_context, dictionary,
                             window_length, stride, count_mode)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            assignments = list(pool.map(code, docs))
    else:
        assignments = [code(doc) for doc in docs]

    write_assignments(assignments, out / "assignments.jsonl")
    atomic_write_text(out / "c0.tsv",
                      "\t".join(f"{x:.17g}" for x in global_context.c0) + "\n")
    cfg = config_hash({"cmd": "infer", "window": window_length, "stride": stride,
                       "a": weights.a, "sample_cap": sample_cap, "seed": seed,
                       "centered_c0": centered, "window_unit": window_unit,
                       "count_mode": count_mode})
    atomic_write_text(out / "c0.json", json.dumps({
        "a": weights.a, "sample_size": global_context.sample_size, "seed": seed,
        "centered": centered, "window_unit": window_unit, **_provenance(cfg),
    }, indent=2) + "\n")
    write_manifest(out, "infer", cfg, ["assignments.jsonl", "c0.tsv", "c0.json"])
    degenerate = sum(1 for a in assignments if a.is_degenerate)
    print(f"coded {len(assignments)} documents "
          f"({degenerate} degenerate) over {global_context.sample_size} sampled windows")


def cmd_topics(settings: Settings) -> None:
    out = _out_dir(settings)
    store = _load_store(settings)
    model_dir = Path(settings.get("model", str, required=True))
    require_input(model_dir / "model.json")
    require_input(model_dir / "atoms.tsv")
    dictionary, _, _, _ = load_model(model_dir)
    top = _positive("top", settings.get("top", int, 25))
    labels_path = settings.get("labels", str)
    labels = read_labels(require_input(labels_path)) if labels_path else None
    topics = interpret_topics(dictionary, store, min(top, store.size), labels)
    write_topics(topics, out / "topics.tsv")
    cfg = config_hash({"cmd": "topics", "top": top})
    write_manifest(out, "topics", cfg, ["topics.tsv"])
    print(f"wrote {len(topics)} topics x {min(top, store.size)} terms")


def cmd_project(settings: Settings) -> None:
    out = _out_dir(settings)
    store = _load_store(settings)
    model_dir = Path(settings.get("model", str, required=True))
    require_input(model_dir / "model.json")
    require_input(model_dir / "atoms.tsv")
    dictionary, _, _, _ = load_model(model_dir)
    spec_path = require_input(settings.get("dimension", str, required=True))
    try:
        spec = json.loads(Path(spec_path).read_text(encoding="utf-8"))
        name = spec["name"]
        positive, negative = list(spec["positive"]), list(spec["negative"])
    except (json.JSONDecodeError, KeyError, TypeError):
        raise DataError(
            f"{spec_path} must be JSON with 'name', 'positive', 'negative'"
        ) from None
    labels_path = settings.get("labels", str)
    labels = read_labels(require_input(labels_path)) if labels_path else {}

    dimension = build_dimension(store, positive, negative, name)
    loadings = project_topics(dimension, dictionary)
    lines = ["atom_id\tlabel\tloading"]
    for atom_id, value in enumerate(loadings):
        lines.append(f"{atom_id}\t{labels.get(atom_id, '')}\t{value:.17g}")
    atomic_write_text(out / "loadings.tsv", "\n".join(lines) + "\n")
    cfg = config_hash({"cmd": "project", "dimension": name,
                       "positive": positive, "negative": negative})
    write_manifest(out, "project", cfg, ["loadings.tsv"])
    print(f"projected {len(loadings)} topics onto dimension {name!r}")


def _read_groups(path: Path) -> dict[str, str]:
    groups: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"groups file line {lineno}: expected 'doc_id<TAB>group'")
            groups[parts[0]] = parts[1]
    return groups


def _read_loadings(path: Path) -> tuple[np.ndarray, dict[int, str]]:
    values: dict[int, float] = {}
    labels: dict[int, str] = {}
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
        if not header.startswith("atom_id"):
            raise DataError(f"{path} does not look like a loadings file")
        for line in handle:
            if not line.strip():
                continue
            atom_id, label, value = line.rstrip("\n").split("\t")
            values[int(atom_id)] = float(value)
            if label:
                labels[int(atom_id)] = label
    k = max(values) + 1
    out = np.full(k, np.nan)
    for atom_id, value in values.items():
        out[atom_id] = value
    return out, labels


def cmd_analyze(settings: Settings) -> None:
    out = _out_dir(settings)
    assignments = read_assignments(
        require_input(settings.get("assignments", str, required=True)))
    groups = _read_groups(require_input(settings.get("groups", str, required=True)))
    loadings, labels = _read_loadings(
        require_input(settings.get("loadings", str, required=True)))
    label_values = sorted(set(groups.values()))
    if len(label_values) != 2:
        raise ConfigError(f"groups file must define exactly 2 groups, got {label_values}")
    group_a = settings.get("group_a", str, label_values[0])
    if group_a not in label_values:
        raise ConfigError(f"group_a {group_a!r} not among groups {label_values}")
    group_b = next(g for g in label_values if g != group_a)

    k = len(loadings)
    ratios = prevalence_ratio(assignments,
                              {d: g == group_a for d, g in groups.items()}, k)
    rho, p = spearman(loadings, ratios.ratio)
    n_used = int(np.sum(~(np.isnan(loadings) | np.isnan(ratios.ratio))))

    lines = ["atom_id\tlabel\tloading\tprevalence_a\tprevalence_b\tratio"]
    for atom_id in range(k):
        ratio = ratios.ratio[atom_id]
        ratio_txt = "" if np.isnan(ratio) else f"{ratio:.17g}"
        lines.append(f"{atom_id}\t{labels.get(atom_id, '')}\t{loadings[atom_id]:.17g}"
                     f"\t{ratios.fraction_a[atom_id]:.17g}"
                     f"\t{ratios.fraction_b[atom_id]:.17g}\t{ratio_txt}")
    atomic_write_text(out / "analysis.tsv", "\n".join(lines) + "\n")
    cfg = config_hash({"cmd": "analyze", "group_a": group_a})
    atomic_write_text(out / "summary.json", json.dumps({
        "rho": rho, "p": p, "n": n_used,
        "group_a": group_a, "group_b": group_b, **_provenance(cfg),
    }, indent=2) + "\n")
    write_manifest(out, "analyze", cfg, ["analysis.tsv", "summary.json"])
    print(f"spearman rho={rho:.4f} p={p:.3g} over n={n_used} topics "
          f"({group_a} vs {group_b})")


def cmd_synth(settings: Settings) -> None:
    out = _out_dir(settings)
    data = generate(
        k_true=_positive("k_true", settings.get("k_true", int, 20), 2),
        dims=_positive("dims", settings.get("dims", int, 30), 2),
        vocab=_positive("vocab", settings.get("vocab", int, 2000), 2),
        t0_true=_positive("t0_true", settings.get("t0_true", int, 3)),
        noise=settings.get("noise", float, 0.01),
        n_docs=_positive("docs", settings.get("docs", int, 200)),
        doc_length=_positive("doc_length", settings.get("doc_length", int, 60)),
        gist_scale=settings.get("gist_scale", float, 8.0),
        orthonormal=settings.get("orthonormal", bool, False),
        seed=settings.get("seed", int, 0),
    )
    artifacts = write_synth(data, out)
    cfg = config_hash({"cmd": "synth", "seed": settings.get("seed", int, 0),
                       "k_true": data.atoms.shape[1], "dims": data.atoms.shape[0],
                       "vocab": data.store.size})
    write_manifest(out, "synth", cfg, list(artifacts.values()))
    print(f"planted {data.atoms.shape[1]} atoms, {data.store.size} words, "
          f"{len(data.docs)} documents")


# ---------------------------------------------------------------------------
# argument parsing

_COMMANDS = {
    "preprocess": cmd_preprocess,
    "fit": cmd_fit,
    "sweep": cmd_sweep,
    "infer": cmd_infer,
    "topics": cmd_topics,
    "project": cmd_project,
    "analyze": cmd_analyze,
    "synth": cmd_synth,
}

_FLAG_SPECS: dict[str, list[tuple[str, type, str]]] = {
    "preprocess": [
        ("corpus", str, "raw corpus (JSONL with id/text, or one doc per line)"),
        ("min-terms", int, "drop documents with fewer tokens (default 50)"),
        ("phrase-threshold", float, "phrase merge score threshold (default 10.0)"),
        ("min-pair-count", int, "discount subtracted from pair counts (default 5)"),
        ("phrase-passes", int, "merge passes; 2 promotes trigrams (default 2)"),
    ],
    "fit": [
        ("embedding", str, "embedding file (header 'V N')"),
        ("counts", str, "term count TSV"),
        ("min-count", int, "drop terms rarer than this (default 15)"),
        ("k", int, "number of atoms"),
        ("t0", int, "sparsity cap per word (default 5)"),
        ("max-iter", int, "learning iterations (default 10)"),
        ("sse-stop", float, "absolute SSE stopping threshold (default 1e-6)"),
        ("omp-tol-scale", float, "per-column residual tolerance factor (default 1e-9)"),
        ("top", int, "terms per topic for the metric snapshot (default 25)"),
        ("backend", str, "kernel backend: auto, compiled, or pure"),
    ],
    "sweep": [
        ("embedding", str, "embedding file"),
        ("counts", str, "term count TSV"),
        ("min-count", int, "drop terms rarer than this (default 15)"),
        ("k-grid", str, "comma-separated atom counts, e.g. 15,100,225"),
        ("seeds", str, "comma-separated seeds (default: --seed)"),
        ("t0", int, "sparsity cap (default 5)"),
        ("max-iter", int, "learning iterations (default 10)"),
        ("top", int, "terms per topic (default 25)"),
        ("backend", str, "kernel backend"),
    ],
    "infer": [
        ("embedding", str, "embedding file"),
        ("counts", str, "term count TSV"),
        ("min-count", int, "drop terms rarer than this (default 15)"),
        ("model", str, "model directory from `datm fit`"),
        ("corpus", str, "tokenized corpus from `datm preprocess`"),
        ("window", int, "context window length (default 10)"),
        ("stride", int, "window stride (default 1)"),
        ("a", float, "frequency smoothing parameter (default 0.001)"),
        ("sample-cap", int, "windows sampled for the global direction (default 50000)"),
        ("window-unit", str, "global-direction sampling unit: window or document"),
        ("count-mode", str, "distribution counting: window or run"),
    ],
    "topics": [
        ("embedding", str, "embedding file"),
        ("counts", str, "term count TSV"),
        ("min-count", int, "drop terms rarer than this (default 15)"),
        ("model", str, "model directory"),
        ("top", int, "terms per topic (default 25)"),
        ("labels", str, "optional atom_id<TAB>label TSV"),
    ],
    "project": [
        ("embedding", str, "embedding file"),
        ("counts", str, "term count TSV"),
        ("min-count", int, "drop terms rarer than this (default 15)"),
        ("model", str, "model directory"),
        ("dimension", str, "dimension spec JSON {name, positive, negative}"),
        ("labels", str, "optional atom_id<TAB>label TSV"),
    ],
    "analyze": [
        ("assignments", str, "assignments JSONL from `datm infer`"),
        ("groups", str, "doc_id<TAB>group TSV with exactly two groups"),
        ("loadings", str, "loadings TSV from `datm project`"),
        ("group-a", str, "group used as the ratio numerator"),
    ],
    "synth": [
        ("k-true", int, "planted atoms (default 20)"),
        ("dims", int, "embedding dimension (default 30)"),
        ("vocab", int, "vocabulary size (default 2000)"),
        ("t0-true", int, "atoms per planted word (default 3)"),
        ("noise", float, "word-vector noise scale (default 0.01)"),
        ("docs", int, "documents to sample (default 200)"),
        ("doc-length", int, "tokens per document (default 60)"),
        ("gist-scale", float, "emission sharpness (default 8.0)"),
    ],
}

_BOOL_FLAGS: dict[str, list[tuple[str, str]]] = {
    "fit": [("pooled-coherence", "pool term pairs across topics instead of "
             "averaging per-topic means")],
    "sweep": [("pooled-coherence", "pool term pairs across topics")],
    "infer": [("centered-c0", "mean-center window embeddings before the "
               "global direction")],
    "synth": [("orthonormal", "plant orthonormal atoms")],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datm",
        description="Topic modeling in embedding space via sparse atom dictionaries.",
    )
    parser.add_argument("--version", action="version", version=f"datm {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, flags in _FLAG_SPECS.items():
        sub = subparsers.add_parser(name, help=f"run the {name} stage")
        sub.add_argument("--config", help="flat key=value config file")
        sub.add_argument("--out", help="output directory")
        sub.add_argument("--seed", type=int, help="base seed for all randomness")
        sub.add_argument("--threads", type=int, help="worker threads for document coding")
        for flag, kind, help_text in flags:
            sub.add_argument(f"--{flag}", type=kind, help=help_text)
        for flag, help_text in _BOOL_FLAGS.get(name, []):
            sub.add_argument(f"--{flag}", action="store_const", const=True,
                             help=help_text)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config_file(args.config) if getattr(args, "config", None) else {}
        _COMMANDS[args.command](Settings(args, config))
    except DatmError as exc:
        print(f"datm {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
