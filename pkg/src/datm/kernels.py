"""Numeric kernels with a compiled fast path and a pure NumPy fallback.

The compiled extension (``datm._ompcore``) implements batch orthogonal
matching pursuit in C; when it is absent (no compiler at install time) the
NumPy twin below is used instead. Selection is made once at import and can
be overridden per call or via the ``DATM_BACKEND`` environment variable
(``auto``, ``compiled``, or ``pure``).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ConfigError

try:
    from . import _ompcore
except ImportError:
    _ompcore = None

# Correlations below RELATIVE_FLOOR * ||y|| count as zero; keep in sync
# with the constant in _ompcore.pyx.
RELATIVE_FLOOR = 1e-13


def compiled_available() -> bool:
    return _ompcore is not None


def resolve_backend(backend: str = "auto") -> str:
    """Map a requested backend name to the one that will actually run."""
    if backend == "auto":
        backend = os.environ.get("DATM_BACKEND", "auto")
    if backend == "auto":
        return "compiled" if compiled_available() else "pure"
    if backend == "compiled":
        if not compiled_available():
            raise ConfigError(
                "compiled kernel requested but datm._ompcore is not built; "
                "run `python setup.py build_ext --inplace` or install the package"
            )
        return "compiled"
    if backend == "pure":
        return "pure"
    raise ConfigError(f"unknown backend {backend!r} (expected auto, compiled, or pure)")


def orient_sign(vec: np.ndarray) -> tuple[np.ndarray, float]:
    """Flip ``vec`` so its largest-magnitude entry is positive.

    Returns the oriented vector and the sign applied (+1.0 or -1.0).
    Resolves the sign ambiguity of singular vectors deterministically.
    """
    pivot = int(np.argmax(np.abs(vec)))
    sign = -1.0 if vec[pivot] < 0 else 1.0
    return sign * vec, sign


def omp_column(atoms: np.ndarray, target: np.ndarray, t0: int, residual_tol: float):
    """Greedy sparse coding of one target column (reference path).

    Selects by maximum absolute correlation with the running residual and
    refits all coefficients by least squares on the selected span after each
    pick. ``np.linalg.lstsq`` gives the minimum-norm solution, so a rank
    deficient selection degrades gracefully.

    Returns (selected atom ids, coefficients, final residual).
    """
    target = np.asarray(target, dtype=np.float64)
    selected: list[int] = []
    coef = np.empty(0)
    residual = target
    floor = RELATIVE_FLOOR * float(np.linalg.norm(target))
    while len(selected) < t0 and np.linalg.norm(residual) > residual_tol:
        corr = atoms.T @ residual
        if selected:
            corr[selected] = 0.0
        best = int(np.argmax(np.abs(corr)))
        if abs(corr[best]) <= floor:
            break
        selected.append(best)
        coef, *_ = np.linalg.lstsq(atoms[:, selected], target, rcond=None)
        residual = target - atoms[:, selected] @ coef
    return selected, coef, residual


def _batch_pure(atoms, targets, t0, tol):
    n_cols = targets.shape[1]
    idx = np.full((n_cols, t0), -1, dtype=np.int32)
    coef = np.zeros((n_cols, t0))
    count = np.zeros(n_cols, dtype=np.int32)
    for col in range(n_cols):
        sel, c, _ = omp_column(atoms, targets[:, col], t0, tol[col])
        count[col] = len(sel)
        idx[col, : len(sel)] = sel
        coef[col, : len(sel)] = c
    return idx, coef, count


def _batch_compiled(atoms, targets, t0, tol):
    gram = np.ascontiguousarray(atoms.T @ atoms)
    corr = np.ascontiguousarray(atoms.T @ targets)
    norms_sq = np.einsum("ij,ij->j", targets, targets)
    n_cols = targets.shape[1]
    idx = np.full((n_cols, t0), -1, dtype=np.int32)
    coef = np.zeros((n_cols, t0))
    count = np.zeros(n_cols, dtype=np.int32)
    fallback = np.zeros(n_cols, dtype=np.uint8)
    _ompcore.batch_omp(gram, corr, norms_sq, tol * tol, t0, idx, coef, count, fallback)
    # columns whose selected span went rank deficient get the minimum-norm
    # reference solve
    for col in np.nonzero(fallback)[0]:
        sel, c, _ = omp_column(atoms, targets[:, col], t0, tol[col])
        idx[col] = -1
        coef[col] = 0.0
        count[col] = len(sel)
        idx[col, : len(sel)] = sel
        coef[col, : len(sel)] = c
    return idx, coef, count


def batch_code(atoms: np.ndarray, targets: np.ndarray, t0: int, tol,
               backend: str = "auto"):
    """Sparse-code every column of ``targets`` against ``atoms``.

    tol may be a scalar or a per-column array of residual-norm tolerances.
    Returns (idx, coef, count) where row ``i`` of idx/coef holds the atoms
    and coefficients for column ``i`` padded with -1 / 0.0.
    """
    atoms = np.ascontiguousarray(atoms, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    tol = np.broadcast_to(np.asarray(tol, dtype=np.float64), (targets.shape[1],))
    tol = np.ascontiguousarray(tol)
    if resolve_backend(backend) == "compiled":
        return _batch_compiled(atoms, targets, t0, tol)
    return _batch_pure(atoms, targets, t0, tol)


def rank_one_svd(mat: np.ndarray, start: np.ndarray | None = None,
                 tol: float = 1e-10, max_iter: int = 1000):
    """Leading singular triple of ``mat`` by power iteration on mat @ mat.T.

    Only the rank-one pair is ever needed for atom updates, so a full SVD
    would be wasted work. ``start`` warm-starts the iteration (the previous
    atom is a good guess); the fallback start is the dominant diagonal of
    the Gram matrix. Returns (u, sigma, v) with u, v unit vectors unless
    ``mat`` is zero, in which case sigma is 0.
    """
    mat = np.asarray(mat, dtype=np.float64)
    gram = mat @ mat.T
    u = None
    if start is not None:
        nrm = np.linalg.norm(start)
        if nrm > 0:
            u = start / nrm
    if u is None:
        pivot = int(np.argmax(np.diag(gram)))
        u = np.zeros(mat.shape[0])
        u[pivot] = 1.0
    for _ in range(max_iter):
        nxt = gram @ u
        nrm = np.linalg.norm(nxt)
        if nrm == 0.0:
            # start was orthogonal to the range; restart deterministically
            pivot = int(np.argmax(np.diag(gram)))
            if gram[pivot, pivot] == 0.0:
                return u, 0.0, np.zeros(mat.shape[1])
            nxt = np.zeros(mat.shape[0])
            nxt[pivot] = 1.0
            nrm = 1.0
        nxt = nxt / nrm
        if np.linalg.norm(nxt - u) < tol:
            u = nxt
            break
        u = nxt
    proj = mat.T @ u
    sigma = float(np.linalg.norm(proj))
    v = proj / sigma if sigma > 0 else np.zeros(mat.shape[1])
    return u, sigma, v
