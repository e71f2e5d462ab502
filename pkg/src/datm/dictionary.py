"""Dictionary learning: alternating sparse coding and rank-one atom updates.

The learned object is a set of unit-norm atom vectors such that every word
vector is approximately a sparse linear combination of atoms. Coding is
orthogonal matching pursuit; each atom is then refit against the residual
matrix restricted to the columns that use it, via its optimal rank-one
approximation.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingStore
from .errors import ConfigError, DataError, InfeasibleConfigError
from .kernels import batch_code, omp_column, orient_sign, rank_one_svd
from .seeding import substream

UNIT_NORM_TOL = 1e-9
# Restricted-error energy below this is noise; the atom keeps its direction
# and sheds its coefficients instead of chasing a zero matrix.
_DEAD_ENERGY = 1e-30


@dataclass(frozen=True)
class AtomDictionary:
    """Unit-norm atom vectors, one per column."""

    atoms: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(self.atoms, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[1] < 2:
            raise DataError("dictionary must be an N x K matrix with K >= 2")
        if not np.all(np.isfinite(mat)):
            raise DataError("dictionary contains NaN or Inf")
        norms = np.linalg.norm(mat, axis=0)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            worst = int(np.argmax(np.abs(norms - 1.0)))
            raise DataError(f"atom {worst} has norm {norms[worst]!r}, expected 1")
        mat.setflags(write=False)
        object.__setattr__(self, "atoms", mat)

    @property
    def k(self) -> int:
        return self.atoms.shape[1]

    @property
    def dimension(self) -> int:
        return self.atoms.shape[0]

    def atom(self, j: int) -> np.ndarray:
        return self.atoms[:, j]


class SparseCode:
    """Per-column sparse coefficients, at most ``t0`` atoms each.

    Backed by padded arrays: row i of ``idx``/``coef`` holds column i's
    selected atoms (padded with -1) and coefficients (padded with 0).
    """

    def __init__(self, idx: np.ndarray, coef: np.ndarray, count: np.ndarray, t0: int):
        self.idx = np.asarray(idx, dtype=np.int32)
        self.coef = np.asarray(coef, dtype=np.float64)
        self.count = np.asarray(count, dtype=np.int32)
        self.t0 = int(t0)
        if self.idx.shape != self.coef.shape or self.idx.shape[0] != self.count.shape[0]:
            raise DataError("inconsistent sparse-code arrays")
        if np.any(self.count > t0):
            raise DataError("a column uses more atoms than the sparsity cap")
        for col in range(self.idx.shape[0]):
            row = self.idx[col, : self.count[col]]
            if len(set(row.tolist())) != len(row):
                raise DataError(f"column {col} repeats an atom index")

    @property
    def n_columns(self) -> int:
        return self.idx.shape[0]

    def pairs(self, col: int) -> list[tuple[int, float]]:
        c = int(self.count[col])
        return [(int(self.idx[col, m]), float(self.coef[col, m])) for m in range(c)]

    def to_dense(self, k: int) -> np.ndarray:
        """Full (k, V) coefficient matrix; intended for small problems."""
        dense = np.zeros((k, self.n_columns))
        rows, pos = np.nonzero(self.idx >= 0)
        dense[self.idx[rows, pos], rows] = self.coef[rows, pos]
        return dense

    @classmethod
    def from_pairs(cls, pairs_per_column: list[list[tuple[int, float]]], t0: int) -> "SparseCode":
        v = len(pairs_per_column)
        idx = np.full((v, t0), -1, dtype=np.int32)
        coef = np.zeros((v, t0))
        count = np.zeros(v, dtype=np.int32)
        for col, pairs in enumerate(pairs_per_column):
            if len(pairs) > t0:
                raise DataError(f"column {col} has more than t0={t0} entries")
            count[col] = len(pairs)
            for m, (a, c) in enumerate(pairs):
                idx[col, m] = a
                coef[col, m] = c
        return cls(idx, coef, count, t0)


@dataclass
class FitReport:
    iterations_run: int
    sse_per_iteration: list[float]
    final_rmse: float
    reinitialized_atoms: int
    sse_violations: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class OmpCode:
    """Result of coding a single target: (atom, coefficient) pairs plus the
    final residual, which is orthogonal to the span of the selected atoms."""

    pairs: tuple[tuple[int, float], ...]
    residual: np.ndarray


def omp_encode(dictionary: AtomDictionary, target: np.ndarray, t0: int,
               residual_tol: float = 0.0) -> OmpCode:
    """Sparse-code one vector against the dictionary.

    Greedy selection by maximum absolute correlation with the residual;
    coefficients are refit by least squares on the selected span after each
    pick (minimum-norm if the span is rank deficient). Stops at ``t0`` atoms
    or when the residual norm drops to ``residual_tol``. A zero target
    yields an empty code.
    """
    if not 1 <= t0 <= dictionary.k:
        raise ConfigError(f"t0 must be in [1, {dictionary.k}]")
    if residual_tol < 0:
        raise ConfigError("residual_tol must be >= 0")
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (dictionary.dimension,):
        raise DataError(f"target must have shape ({dictionary.dimension},)")
    sel, coefs, residual = omp_column(dictionary.atoms, target, t0, residual_tol)
    return OmpCode(tuple(zip(sel, (float(c) for c in coefs))), residual)


def reconstruct(dictionary: AtomDictionary, code: SparseCode) -> np.ndarray:
    """Dense product of the atom matrix with the sparse coefficients."""
    if np.any(code.idx >= dictionary.k):
        raise DataError("sparse code references an atom beyond the dictionary")
    return _reconstruct_arrays(dictionary.atoms, code.idx, code.coef)


def _reconstruct_arrays(atoms, idx, coef):
    recon = np.zeros((atoms.shape[0], idx.shape[0]))
    for m in range(idx.shape[1]):
        cols = np.nonzero(idx[:, m] >= 0)[0]
        if cols.size:
            recon[:, cols] += atoms[:, idx[cols, m]] * coef[cols, m]
    return recon


def _column_sq_errors(atoms, idx, coef, data):
    diff = data - _reconstruct_arrays(atoms, idx, coef)
    return np.einsum("ij,ij->j", diff, diff)


def fit(embedding: EmbeddingStore, k: int, t0: int = 5, max_iter: int = 10,
        seed: int = 0, sse_stop: float = 1e-6, omp_tol_scale: float = 1e-9,
        backend: str = "auto") -> tuple[AtomDictionary, SparseCode, FitReport]:
    """Learn ``k`` atoms from an embedding store. See ``fit_matrix``."""
    return fit_matrix(embedding.matrix, k, t0, max_iter=max_iter, seed=seed,
                      sse_stop=sse_stop, omp_tol_scale=omp_tol_scale, backend=backend)


def fit_matrix(data: np.ndarray, k: int, t0: int = 5, max_iter: int = 10,
               seed: int = 0, sse_stop: float = 1e-6, omp_tol_scale: float = 1e-9,
               backend: str = "auto") -> tuple[AtomDictionary, SparseCode, FitReport]:
    """Alternating minimization of ||Y - DX||_F^2 with ||x_i||_0 <= t0.

    Starts from ``k`` distinct data columns chosen uniformly at random
    (seeded), normalized. Each iteration codes every column by OMP, then
    updates atoms one at a time: the restricted error matrix over the
    columns using the atom is approximated at rank one, the atom becomes
    the leading left singular vector (sign-fixed so its largest-magnitude
    entry is positive) and the used coefficients become the singular value
    times the right singular vector. Atoms used by no column are replaced
    by the worst-reconstructed data column. Stops after ``max_iter``
    iterations or once total squared error falls below ``sse_stop``.

    Deterministic: identical data, parameters, seed, and backend give a
    bitwise-identical dictionary.
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DataError("data must be an N x V matrix")
    if not np.all(np.isfinite(data)):
        raise DataError("data contains NaN or Inf")
    n_dim, n_cols = data.shape
    if k > n_cols:
        raise InfeasibleConfigError(f"k={k} atoms exceed the {n_cols} data columns")
    if k < 2:
        raise ConfigError("k must be >= 2")
    if not 1 <= t0 <= k:
        raise ConfigError(f"t0 must be in [1, {k}]")
    if max_iter < 1:
        raise ConfigError("max_iter must be >= 1")

    col_norms = np.linalg.norm(data, axis=0)
    usable = np.nonzero(col_norms > 0)[0]
    if usable.size < k:
        raise DataError(f"only {usable.size} nonzero columns for k={k} atoms")
    rng = substream(seed, "init")
    chosen = rng.choice(usable, size=k, replace=False)
    atoms = data[:, chosen] / col_norms[chosen]
    for j in range(k):
        atoms[:, j], _ = orient_sign(atoms[:, j])

    tol = omp_tol_scale * col_norms
    sse_history: list[float] = []
    violations: list[int] = []
    reinits = 0
    idx = coef = count = None
    for iteration in range(max_iter):
        idx, coef, count = batch_code(atoms, data, t0, tol, backend=backend)
        # reconstruction errors for the dead-atom policy; valid until some
        # atom update changes coefficients, and each claimed column is
        # knocked out so two dead atoms never grab the same replacement
        stale_errors = None
        for atom_id in range(k):
            using = np.nonzero((idx == atom_id).any(axis=1))[0]
            if using.size == 0:
                if stale_errors is None:
                    stale_errors = _column_sq_errors(atoms, idx, coef, data)
                worst = int(np.argmax(stale_errors))
                replacement = data[:, worst]
                nrm = np.linalg.norm(replacement)
                if nrm > 0:
                    atoms[:, atom_id], _ = orient_sign(replacement / nrm)
                    reinits += 1
                stale_errors[worst] = -1.0
                continue
            rows, pos = np.nonzero(idx[using] == atom_id)
            sub = np.zeros((k, using.size))
            vr, vm = np.nonzero(idx[using] >= 0)
            sub[idx[using][vr, vm], vr] = coef[using][vr, vm]
            restricted = data[:, using] - atoms @ sub
            restricted += np.outer(atoms[:, atom_id], sub[atom_id])
            if np.einsum("ij,ij->", restricted, restricted) < _DEAD_ENERGY:
                coef[using[rows], pos] = 0.0
                stale_errors = None
                continue
            left, sigma, right = rank_one_svd(restricted, start=atoms[:, atom_id])
            left, sign = orient_sign(left)
            atoms[:, atom_id] = left
            coef[using[rows], pos] = sign * sigma * right[rows]
            stale_errors = None
        sse = float(np.sum(_column_sq_errors(atoms, idx, coef, data)))
        if sse_history and sse > sse_history[-1] + 1e-6 * sse_history[0]:
            violations.append(iteration)
            warnings.warn(f"SSE rose at iteration {iteration}: "
                          f"{sse_history[-1]:.6g} -> {sse:.6g}", stacklevel=2)
        sse_history.append(sse)
        if sse < sse_stop:
            break

    report = FitReport(
        iterations_run=len(sse_history),
        sse_per_iteration=sse_history,
        final_rmse=float(np.sqrt(sse_history[-1] / (n_dim * n_cols))),
        reinitialized_atoms=reinits,
        sse_violations=violations,
    )
    return AtomDictionary(atoms), SparseCode(idx, coef, count, t0), report


def save_model(directory: str | Path, dictionary: AtomDictionary, code: SparseCode,
               words: list[str], header: dict) -> None:
    """Write model.json, atoms.tsv (K rows of N floats), and codes.tsv.

    Floats use 17 significant digits so a round trip reproduces the
    dictionary exactly.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if len(words) != code.n_columns:
        raise DataError("word list length does not match the sparse code")
    meta = {
        "n": dictionary.dimension,
        "k": dictionary.k,
        "t0": code.t0,
        "words": list(words),
    }
    meta.update(header)
    (directory / "model.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    with open(directory / "atoms.tsv", "w", encoding="utf-8") as handle:
        for j in range(dictionary.k):
            handle.write("\t".join(f"{x:.17g}" for x in dictionary.atoms[:, j]) + "\n")
    with open(directory / "codes.tsv", "w", encoding="utf-8") as handle:
        for col, word in enumerate(words):
            for atom_id, value in code.pairs(col):
                handle.write(f"{word}\t{atom_id}\t{value:.17g}\n")


def load_model(directory: str | Path) -> tuple[AtomDictionary, SparseCode, list[str], dict]:
    directory = Path(directory)
    try:
        meta = json.loads((directory / "model.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{directory} has no model.json; produce one with `datm fit`") from None
    words = [str(w) for w in meta["words"]]
    k, t0 = int(meta["k"]), int(meta["t0"])
    rows = []
    with open(directory / "atoms.tsv", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                rows.append([float(x) for x in line.split("\t")])
    if len(rows) != k:
        raise DataError(f"atoms.tsv has {len(rows)} rows, expected k={k}")
    atoms = np.array(rows).T
    column_of = {w: i for i, w in enumerate(words)}
    pairs_per_column: list[list[tuple[int, float]]] = [[] for _ in words]
    with open(directory / "codes.tsv", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            word, atom_id, value = line.rstrip("\n").split("\t")
            if word not in column_of:
                raise DataError(f"codes.tsv references unknown word {word!r}")
            if not 0 <= int(atom_id) < k:
                raise DataError(f"codes.tsv references atom {atom_id} outside [0, {k})")
            pairs_per_column[column_of[word]].append((int(atom_id), float(value)))
    code = SparseCode.from_pairs(pairs_per_column, t0)
    return AtomDictionary(atoms), code, words, meta
