"""Small dense kernel: tensor products, Hilbert-Schmidt norm, restricted projector.

Index sets are 1-based throughout the public API (variables are numbered
``1..p``); conversion to 0-based positions happens only inside this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import SingularSubmatrix

#: Blocks with reciprocal condition number below this are treated as singular.
RCOND_MIN = 1e-12


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing subset of ``{1, ..., ambient}``.

    Use :meth:`of` to build one from an unordered iterable and :meth:`empty`
    for the explicitly empty set.
    """

    members: tuple
    ambient: int
    allow_empty: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        if self.ambient < 1:
            raise ValueError(f"ambient dimension must be >= 1, got {self.ambient}")
        if not members and not self.allow_empty:
            raise ValueError("index set is empty; use IndexSet.empty(p) for the empty set")
        if any(b <= a for a, b in zip(members, members[1:])):
            raise ValueError(f"members must be strictly increasing: {members}")
        if members and (members[0] < 1 or members[-1] > self.ambient):
            raise ValueError(f"members {members} outside 1..{self.ambient}")

    @classmethod
    def of(cls, indices: Iterable[int], ambient: int) -> "IndexSet":
        return cls(tuple(sorted(set(int(i) for i in indices))), ambient)

    @classmethod
    def empty(cls, ambient: int) -> "IndexSet":
        return cls((), ambient, allow_empty=True)

    @classmethod
    def full(cls, ambient: int) -> "IndexSet":
        return cls(tuple(range(1, ambient + 1)), ambient)

    def complement(self) -> "IndexSet":
        rest = [i for i in range(1, self.ambient + 1) if i not in self.members]
        return IndexSet(tuple(rest), self.ambient, allow_empty=True)

    def without(self, i: int) -> "IndexSet":
        return IndexSet(tuple(m for m in self.members if m != i), self.ambient,
                        allow_empty=True)

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.intp) - 1

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i):
        return i in self.members

    def __str__(self):
        return "{" + ",".join(str(m) for m in self.members) + "}"


IndexLike = Union[IndexSet, Iterable[int]]


def as_index_set(K: IndexLike, p: int) -> IndexSet:
    if isinstance(K, IndexSet):
        if K.ambient != p:
            raise ValueError(f"index set lives in 1..{K.ambient}, expected 1..{p}")
        return K
    return IndexSet.of(K, p)


def as_matrix(M, name="matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D float array (vectors become columns)."""
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def outer_product(u, v) -> np.ndarray:
    """Matrix of the map ``h -> <u, h> v``; entry ``(i, j)`` is ``v[i] * u[j]``."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("outer_product arguments must be finite")
    return np.outer(v, u)


def hs_norm(M) -> float:
    """Hilbert-Schmidt norm ``sqrt(tr(M M^T))``, i.e. the Frobenius norm."""
    A = np.asarray(M, dtype=float)
    return float(np.sqrt(np.sum(A * A)))


def _factor_block(v1: np.ndarray, idx: np.ndarray, members):
    block = v1[np.ix_(idx, idx)]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(block)
    if not np.isfinite(cond) or 1.0 / cond < RCOND_MIN:
        raise SingularSubmatrix(
            f"submatrix on {members} is singular (condition number {cond:.3g})",
            members=members)
    try:
        return cho_factor(block, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise SingularSubmatrix(f"submatrix on {members} is not positive definite",
                                members=members) from exc


def restricted_solve(K: IndexLike, v1, rhs) -> np.ndarray:
    """Compute ``Pi_K @ rhs`` without forming ``Pi_K``.

    ``Pi_K = A_K^T (A_K v1 A_K^T)^{-1} A_K`` so only the ``K`` rows of the
    result are nonzero.
    """
    v1 = np.asarray(v1, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    K = as_index_set(K, v1.shape[0])
    out = np.zeros_like(rhs, dtype=float)
    if len(K) == 0:
        return out
    idx = K.zero_based()
    cf = _factor_block(v1, idx, K.members)
    out[idx] = cho_solve(cf, rhs[idx], check_finite=False)
    return out


def restricted_projector(K: IndexLike, v1) -> np.ndarray:
    """Return ``A_K^T (A_K v1 A_K^T)^{-1} A_K`` as a ``p x p`` matrix.

    The ``K x K`` block is inverted through a Cholesky solve.

    Raises
    ------
    SingularSubmatrix
        If the block's reciprocal condition number is below ``RCOND_MIN`` or
        the block is not positive definite.
    """
    v1 = as_matrix(v1, "v1")
    p = v1.shape[0]
    if v1.shape != (p, p):
        raise ValueError(f"v1 must be square, got {v1.shape}")
    K = as_index_set(K, p)
    if len(K) == 0:
        raise ValueError("restricted_projector needs a non-empty index set")
    return restricted_solve(K, v1, np.eye(p))
