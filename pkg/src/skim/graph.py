"""
Base graphs, independent cascade models and sets of propagation instances.

Nodes are dense integer ids ``0..n-1``.  Adjacency is kept in CSR form so the
numba kernels in :mod:`skim._kernels` can walk it without Python overhead.
"""

from __future__ import annotations

import io
import os
import struct
import zlib
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BaseGraph",
    "ICModel",
    "MultiInstanceGraph",
    "EdgeListError",
    "load_edge_list",
    "assign_uniform",
    "assign_weighted_cascade",
    "sample_instances",
    "instance_rng",
    "write_instances",
    "read_instances",
]

MIGR_MAGIC = b"MIGR"
MIGR_VERSION = 1


class EdgeListError(ValueError):
    """Raised for malformed or empty edge-list input."""


def _csr(src: np.ndarray, dst: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((dst, src))
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=ptr[1:])
    return ptr, dst[order].astype(np.int32, copy=False)


def _dedup(tails: np.ndarray, heads: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    keys = np.unique(tails.astype(np.int64) * n + heads.astype(np.int64))
    return (keys // n).astype(np.int32), (keys % n).astype(np.int32)


class BaseGraph:
    """A directed simple graph on ``n`` dense node ids.

    Arcs are stored sorted by ``(tail, head)`` with duplicates removed.

    Parameters
    ----------
    n : int
        Number of nodes.
    tails, heads : array-like of int
        Arc endpoints.  Duplicates are collapsed.
    labels : array-like, optional
        Original node id of each dense id when the input was relabelled.
    """

    def __init__(self, n: int, tails, heads, labels=None):
        tails = np.asarray(tails, dtype=np.int64)
        heads = np.asarray(heads, dtype=np.int64)
        if tails.shape != heads.shape:
            raise ValueError("tails and heads must have equal length")
        if n < 0:
            raise ValueError("n must be non-negative")
        if tails.size and (min(tails.min(), heads.min()) < 0 or max(tails.max(), heads.max()) >= n):
            raise ValueError("arc endpoint outside [0, n)")
        self.n = int(n)
        self.tails, self.heads = _dedup(tails, heads, max(self.n, 1))
        self.labels = None if labels is None else np.asarray(labels)
        self.fwd_ptr, self.fwd_adj = _csr(self.tails, self.heads, self.n)
        self.rev_ptr, self.rev_adj = _csr(self.heads, self.tails, self.n)

    @property
    def m(self) -> int:
        return int(self.tails.size)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.tails.tolist(), self.heads.tolist()))

    def in_degree(self) -> np.ndarray:
        return np.diff(self.rev_ptr)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.fwd_ptr)

    def __repr__(self) -> str:
        return f"BaseGraph(n={self.n}, m={self.m})"


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        path = os.fspath(source)
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                return fh.read()
        if isinstance(source, str):
            return source
        raise FileNotFoundError(path)
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return source.read()
    return str(source)


def load_edge_list(source, directed: bool = True, relabel: bool = False) -> BaseGraph:
    """Parse a whitespace-separated ``tail head`` edge list.

    Parameters
    ----------
    source : str, path or file object
        Either the text itself, a path to a file, or an open text stream.
        Lines starting with ``#`` and blank lines are skipped.
    directed : bool
        If False, every line yields both arcs.
    relabel : bool
        Compress the ids that occur into ``0..n-1`` (sorted order) and keep the
        original ids in ``BaseGraph.labels``.  Without it ``n = 1 + max id``.

    Raises
    ------
    EdgeListError
        On a malformed line (the message carries the 1-based line number) or
        when no arcs are found.
    """
    text = _read_text(source)
    tails: list[int] = []
    heads: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) < 2:
            raise EdgeListError(f"line {lineno}: expected 'tail head', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise EdgeListError(f"line {lineno}: negative node id in {line!r}")
        tails.append(u)
        heads.append(v)
    if not tails:
        raise EdgeListError("edge list is empty")

    t = np.array(tails, dtype=np.int64)
    h = np.array(heads, dtype=np.int64)
    labels = None
    if relabel:
        labels, inverse = np.unique(np.concatenate([t, h]), return_inverse=True)
        t, h = inverse[: t.size], inverse[t.size :]
        n = labels.size
    else:
        n = int(max(t.max(), h.max())) + 1
    if not directed:
        t, h = np.concatenate([t, h]), np.concatenate([h, t])
    return BaseGraph(n, t, h, labels=labels)


class ICModel:
    """A base graph with an activation probability on every arc.

    ``p[j]`` belongs to arc ``(base.tails[j], base.heads[j])``.
    """

    def __init__(self, base: BaseGraph, p):
        p = np.asarray(p, dtype=np.float64)
        if p.shape != (base.m,):
            raise ValueError(f"expected {base.m} probabilities, got shape {p.shape}")
        if p.size and (np.any(~np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0):
            raise ValueError("arc probabilities must lie in [0, 1]")
        self.base = base
        self.p = p

    def prob(self, u: int, v: int) -> float:
        b = self.base
        lo, hi = b.fwd_ptr[u], b.fwd_ptr[u + 1]
        j = lo + np.searchsorted(b.heads[lo:hi], v)
        if j >= hi or b.heads[j] != v:
            raise KeyError((u, v))
        return float(self.p[j])


def assign_uniform(base: BaseGraph, p: float) -> ICModel:
    """Give every arc the same probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return ICModel(base, np.full(base.m, float(p)))


def assign_weighted_cascade(base: BaseGraph) -> ICModel:
    """Weighted cascade: arc ``(u, v)`` gets ``1 / indeg(v)``."""
    if base.n == 0:
        raise ValueError("graph has no nodes")
    indeg = base.in_degree()
    return ICModel(base, 1.0 / indeg[base.heads])


def _domain_tag(domain: str) -> int:
    return zlib.crc32(domain.encode("utf-8"))


def instance_rng(seed: int, domain: str, index: int) -> np.random.Generator:
    """Independent generator for stream ``index`` of ``domain`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_domain_tag(domain), int(index)))
    return np.random.default_rng(ss)


class MultiInstanceGraph:
    """``ell`` propagation instances sharing the node set ``0..n-1``.

    Forward and reverse adjacency of every instance live in shared flat
    arrays; ``fwd_ptr[i]`` holds absolute offsets into ``fwd_adj`` for
    instance ``i`` (likewise for the reverse side).
    """

    def __init__(self, n: int, instances: Sequence[tuple[np.ndarray, np.ndarray]]):
        if len(instances) < 1:
            raise ValueError("need at least one instance")
        self.n = int(n)
        self.ell = len(instances)
        fwd_ptr = np.zeros((self.ell, self.n + 1), dtype=np.int64)
        rev_ptr = np.zeros((self.ell, self.n + 1), dtype=np.int64)
        fwd_parts, rev_parts, tails_l, heads_l = [], [], [], []
        offset = 0
        for i, (t, h) in enumerate(instances):
            t, h = _dedup(np.asarray(t, np.int64), np.asarray(h, np.int64), max(self.n, 1))
            if t.size and max(t.max(), h.max()) >= self.n:
                raise ValueError("arc endpoint outside [0, n)")
            fp, fa = _csr(t, h, self.n)
            rp, ra = _csr(h, t, self.n)
            fwd_ptr[i] = fp + offset
            rev_ptr[i] = rp + offset
            offset += t.size
            fwd_parts.append(fa)
            rev_parts.append(ra)
            tails_l.append(t)
            heads_l.append(h)
        self.fwd_ptr = fwd_ptr
        self.rev_ptr = rev_ptr
        self.fwd_adj = np.concatenate(fwd_parts) if offset else np.zeros(0, np.int32)
        self.rev_adj = np.concatenate(rev_parts) if offset else np.zeros(0, np.int32)
        self._tails = tails_l
        self._heads = heads_l

    @classmethod
    def replicate(cls, base: BaseGraph, ell: int) -> "MultiInstanceGraph":
        """``ell`` identical copies of ``base`` (deterministic instances)."""
        return cls(base.n, [(base.tails, base.heads)] * ell)

    def arcs(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Sorted ``(tails, heads)`` of instance ``i``."""
        return self._tails[i], self._heads[i]

    def arc_counts(self) -> np.ndarray:
        return np.array([t.size for t in self._tails], dtype=np.int64)

    def successors(self, i: int, u: int) -> np.ndarray:
        return self.fwd_adj[self.fwd_ptr[i, u] : self.fwd_ptr[i, u + 1]]

    def predecessors(self, i: int, u: int) -> np.ndarray:
        return self.rev_adj[self.rev_ptr[i, u] : self.rev_ptr[i, u + 1]]

    def in_degrees(self) -> np.ndarray:
        """``(ell, n)`` in-degree table."""
        return np.diff(self.rev_ptr, axis=1)

    @property
    def m(self) -> int:
        """Sum over nodes of the maximum in-degree across instances."""
        return int(self.in_degrees().max(axis=0).sum())

    def union_graph(self) -> BaseGraph:
        return BaseGraph(self.n, np.concatenate(self._tails), np.concatenate(self._heads))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiInstanceGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.ell == other.ell
            and all(
                np.array_equal(a, c) and np.array_equal(b, d)
                for (a, b), (c, d) in zip(
                    zip(self._tails, self._heads), zip(other._tails, other._heads)
                )
            )
        )

    def __repr__(self) -> str:
        return f"MultiInstanceGraph(n={self.n}, ell={self.ell}, arcs={int(self.arc_counts().sum())})"


def sample_instances(model: ICModel, ell: int, seed: int, domain: str = "sample") -> MultiInstanceGraph:
    """Draw ``ell`` independent cascade instances from ``model``.

    Arc ``e`` is live in instance ``i`` with probability ``p_e``.  Instance
    ``i`` uses its own stream derived from ``(seed, domain, i)``, so the
    result does not depend on the order instances are generated in.  Use a
    different ``domain`` (e.g. ``"eval"``) for held-out instances.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    base = model.base
    out = []
    for i in range(ell):
        live = instance_rng(seed, domain, i).random(base.m) < model.p
        out.append((base.tails[live], base.heads[live]))
    return MultiInstanceGraph(base.n, out)


# -- binary instance-set format ------------------------------------------------

def write_instances(path, g: MultiInstanceGraph) -> None:
    """Write ``g`` in the MIGR binary format (all fields little-endian u32)."""
    with open(path, "wb") as fh:
        fh.write(MIGR_MAGIC)
        fh.write(struct.pack("<III", MIGR_VERSION, g.n, g.ell))
        for i in range(g.ell):
            t, h = g.arcs(i)
            fh.write(struct.pack("<I", t.size))
            pairs = np.empty((t.size, 2), dtype="<u4")
            pairs[:, 0] = t
            pairs[:, 1] = h
            fh.write(pairs.tobytes())


def read_instances(path) -> MultiInstanceGraph:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MIGR_MAGIC:
        raise ValueError(f"{path}: not a MIGR file")
    version, n, ell = struct.unpack_from("<III", data, 4)
    if version != MIGR_VERSION:
        raise ValueError(f"{path}: unsupported MIGR version {version}")
    pos = 16
    out = []
    for _ in range(ell):
        (count,) = struct.unpack_from("<I", data, pos)
        pos += 4
        pairs = np.frombuffer(data, dtype="<u4", count=2 * count, offset=pos).reshape(count, 2)
        pos += 8 * count
        out.append((pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64)))
    if pos != len(data):
        raise ValueError(f"{path}: trailing bytes after {ell} instances")
    return MultiInstanceGraph(n, out)


def is_migr(path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == MIGR_MAGIC
    except OSError:
        return False
