"""Graph construction, degree-biased weights, and random-graph property checkers.

Graphs are simple, undirected and immutable.  The per-vertex weight
pi_v = d(v)/2m is kept exact (integer degree numerator over the shared
denominator 2m) because the martingale checks downstream must be exact;
floats appear only at reporting boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "Graph",
    "GraphStats",
    "make_complete",
    "make_path",
    "sample_gnp",
    "graph_stats",
    "check_p1",
    "check_p2",
    "check_p3",
    "P1Report",
    "P2Report",
    "P3Report",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph with CSR adjacency.

    Attributes
    ----------
    n : vertex count
    m : edge count
    edges : (m, 2) int32 array of pairs u < v
    degrees : int64 degree per vertex
    adj_flat, adj_off : CSR neighbour lists; neighbours of v are
        adj_flat[adj_off[v]:adj_off[v+1]], sorted ascending
    """

    n: int
    m: int
    edges: np.ndarray
    degrees: np.ndarray
    adj_flat: np.ndarray
    adj_off: np.ndarray

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj_flat[self.adj_off[v]:self.adj_off[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @property
    def pi(self) -> list[Fraction]:
        """Exact stationary weights pi_v = d(v)/2m."""
        den = 2 * self.m
        return [Fraction(int(d), den) for d in self.degrees]

    def pi_of(self, v: int) -> Fraction:
        return Fraction(int(self.degrees[v]), 2 * self.m)

    def to_edgelist_text(self) -> str:
        """Serialize as 'n m' header plus one 'u v' line per edge (0-based)."""
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{int(u)} {int(v)}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_edgelist_text())


def from_edges(n: int, edges) -> Graph:
    """Build a Graph from an iterable of vertex pairs, validating simplicity."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    earr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                      dtype=np.int64)
    if earr.size == 0:
        earr = earr.reshape(0, 2)
    if earr.ndim != 2 or earr.shape[1] != 2:
        raise ValueError("edges must be pairs")
    m = earr.shape[0]
    u = np.minimum(earr[:, 0], earr[:, 1])
    v = np.maximum(earr[:, 0], earr[:, 1])
    if m:
        if u.min() < 0 or v.max() >= n:
            bad = int(np.argmax((u < 0) | (v >= n)))
            raise ValueError(f"edge {tuple(earr[bad])} out of range for n={n}")
        if (u == v).any():
            raise ValueError(f"self-loop at vertex {int(u[(u == v)][0])}")
        key = u * n + v
        if np.unique(key).size != m:
            raise ValueError("duplicate edge in edge list")
    degrees = np.bincount(np.concatenate([u, v]), minlength=n).astype(np.int64)
    # one argsort of the directed-edge keys yields CSR with sorted neighbours
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.argsort(src * n + dst)
    adj_flat = dst[order].astype(np.int32)
    adj_off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=adj_off[1:])
    earr2 = np.stack([u, v], axis=1).astype(np.int32)
    for arr in (earr2, degrees, adj_flat, adj_off):
        arr.setflags(write=False)
    return Graph(n=n, m=m, edges=earr2, degrees=degrees,
                 adj_flat=adj_flat, adj_off=adj_off)


def from_edgelist_text(text: str) -> Graph:
    """Parse the 'n m' header / 'u v' lines format written by to_edgelist_text."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty edge-list text")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"bad header {lines[0]!r}, expected 'n m'")
    n, m = int(head[0]), int(head[1])
    if len(lines) - 1 != m:
        raise ValueError(f"header says m={m} but found {len(lines)-1} edge lines")
    edges = []
    for ln in lines[1:]:
        u, v = ln.split()
        edges.append((int(u), int(v)))
    return from_edges(n, edges)


def load(path) -> Graph:
    with open(path) as fh:
        return from_edgelist_text(fh.read())


def make_complete(n: int) -> Graph:
    """Complete graph K_n (n >= 2)."""
    if n < 2:
        raise ValueError(f"complete graph needs n >= 2, got {n}")
    iu = np.triu_indices(n, k=1)
    edges = np.stack([iu[0], iu[1]], axis=1)
    return from_edges(n, edges)


def make_path(n: int) -> Graph:
    """Path graph on vertices 0..n-1 with edges (i, i+1)."""
    if n < 2:
        raise ValueError(f"path needs n >= 2, got {n}")
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def sample_gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n,p) sample, deterministic for a fixed seed.

    Uses geometric skips over the lexicographic pair index, so the cost is
    O(m) expected rather than O(n^2).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if p == 1.0:
        return make_complete(n) if n >= 2 else from_edges(n, [])
    total = n * (n - 1) // 2
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    log1mp = math.log1p(-p)
    picked = []
    k = -1
    chunk = max(1024, int(total * p * 1.2) + 16)
    while True:
        u = rng.random(chunk)
        skips = np.floor(np.log(u) / log1mp).astype(np.int64)
        steps = np.cumsum(skips + 1)
        idx = k + steps
        if idx[-1] < total:
            picked.append(idx)
            k = int(idx[-1])
            continue
        picked.append(idx[idx < total])
        break
    if picked:
        ks = np.concatenate(picked)
    else:
        ks = np.zeros(0, dtype=np.int64)
    # invert lexicographic pair index: k = u*(2n-u-1)/2 + (v-u-1)
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(b * b - 8.0 * ks)) / 2.0).astype(np.int64)
    for _ in range(3):  # fix float rounding at row boundaries
        base = u * (2 * n - u - 1) // 2
        u -= base > ks
        over = (u + 1) * (2 * n - u - 2) // 2 <= ks
        u += over
        if not over.any() and (u * (2 * n - u - 1) // 2 <= ks).all():
            break
    base = u * (2 * n - u - 1) // 2
    v = ks - base + u + 1
    return from_edges(n, np.stack([u, v], axis=1))


@dataclass(frozen=True)
class GraphStats:
    connected: bool
    min_degree: int
    max_degree: int
    pi_l2_sq: Fraction  # sum of pi_v^2
    pi_inf: Fraction    # max pi_v


def _connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    if g.m == 0:
        return False
    # iterative BFS; no recursion so million-vertex paths are fine
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    frontier = [0]
    count = 1
    while frontier:
        nxt = []
        for v in frontier:
            for w in g.neighbors(v):
                w = int(w)
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    nxt.append(w)
        frontier = nxt
    return count == g.n


def graph_stats(g: Graph) -> GraphStats:
    den = 2 * g.m if g.m else 1
    l2 = Fraction(int(np.sum(g.degrees.astype(object) ** 2)), den * den)
    inf = Fraction(int(g.degrees.max()) if g.n else 0, den)
    return GraphStats(
        connected=_connected(g),
        min_degree=int(g.degrees.min()) if g.n else 0,
        max_degree=int(g.degrees.max()) if g.n else 0,
        pi_l2_sq=l2,
        pi_inf=inf,
    )


@dataclass(frozen=True)
class P1Report:
    """Almost-regularity check for a G(n,p) sample.

    degree_dev_max is max_v |d(v) - np| / sqrt(np ln n); pi_dev_max is
    max_v |pi_v - 1/n| * n * (ln n)^(eps/2) with eps inferred from np.
    The band booleans use calibration constants (2.0 / 3.0) because the
    asymptotic statement hides its constant.
    """
    connected: bool
    degree_dev_max: float
    degree_band_ok: bool
    pi_dev_max: float
    pi_band_ok: bool
    eps: float

    def to_dict(self) -> dict:
        return {
            "connected": self.connected,
            "degree_dev_max": self.degree_dev_max,
            "degree_band_ok": self.degree_band_ok,
            "pi_dev_max": self.pi_dev_max,
            "pi_band_ok": self.pi_band_ok,
            "eps": self.eps,
        }


def check_p1(g: Graph, p: float, degree_band: float = 2.0,
             pi_band: float = 3.0) -> P1Report:
    """Check connectivity, degree concentration and pi concentration.

    Degrees are compared against their exact binomial mean (n-1)p (the
    asymptotic np of the almost-regularity statement), normalized by
    sqrt(np ln n); a complete graph at p=1 scores exactly 0.
    """
    n = g.n
    npd = n * p
    logn = math.log(n)
    connected = _connected(g)
    if g.m == 0:
        return P1Report(connected=False, degree_dev_max=float("inf"),
                        degree_band_ok=False, pi_dev_max=float("inf"),
                        pi_band_ok=False, eps=0.0)
    scale = math.sqrt(npd * logn)
    degree_dev = float(np.abs(g.degrees - (n - 1) * p).max() / scale)
    # np >= (ln n)^(1+eps)  =>  eps = ln(np)/ln(ln n) - 1
    eps = max(math.log(npd) / math.log(logn) - 1.0, 0.0)
    pi_scale = n * logn ** (eps / 2.0)
    pi_dev = float(max(abs(d / (2.0 * g.m) - 1.0 / n) for d in g.degrees) * pi_scale)
    return P1Report(
        connected=connected,
        degree_dev_max=degree_dev,
        degree_band_ok=degree_dev <= degree_band,
        pi_dev_max=pi_dev,
        pi_band_ok=pi_dev <= pi_band,
        eps=eps,
    )


@dataclass(frozen=True)
class P2Report:
    x_ab: int
    mu: float
    within_band: bool

    def to_dict(self) -> dict:
        return {"x_ab": self.x_ab, "mu": self.mu, "within_band": self.within_band}


def check_p2(g: Graph, a_set, b_set, p: float) -> P2Report:
    """Count edges between disjoint sets A, B against the band [mu/2, 3mu/2]."""
    a = set(int(v) for v in a_set)
    b = set(int(v) for v in b_set)
    if a & b:
        raise ValueError("a_set and b_set must be disjoint")
    mu = len(a) * len(b) * p
    amask = np.zeros(g.n, dtype=bool)
    bmask = np.zeros(g.n, dtype=bool)
    amask[list(a)] = True
    bmask[list(b)] = True
    eu, ev = g.edges[:, 0], g.edges[:, 1]
    x_ab = int(np.sum((amask[eu] & bmask[ev]) | (bmask[eu] & amask[ev])))
    if mu == 0:
        within = x_ab == 0
    else:
        within = mu / 2 <= x_ab <= 3 * mu / 2
    return P2Report(x_ab=x_ab, mu=mu, within_band=within)


@dataclass(frozen=True)
class P3Report:
    induced_edges: int
    bound_i: float        # e^2 s^2 p
    bound_i_ok: bool
    bound_ii: float       # s sqrt(3 d ln(ne/s))
    bound_ii_ok: bool
    boundary_edges: int   # edges from S to V \ S
    ratio: float          # X_S / X_{S, V-S}

    def to_dict(self) -> dict:
        return {
            "induced_edges": self.induced_edges,
            "bound_i": self.bound_i,
            "bound_i_ok": self.bound_i_ok,
            "bound_ii": self.bound_ii,
            "bound_ii_ok": self.bound_ii_ok,
            "boundary_edges": self.boundary_edges,
            "ratio": self.ratio,
        }


def check_p3(g: Graph, s_set, p: float) -> P3Report:
    """Induced-edge count of a small set against the sparsity bounds."""
    s = set(int(v) for v in s_set)
    size = len(s)
    mask = np.zeros(g.n, dtype=bool)
    if s:
        mask[list(s)] = True
    eu, ev = g.edges[:, 0], g.edges[:, 1]
    inside = int(np.sum(mask[eu] & mask[ev]))
    boundary = int(np.sum(mask[eu] ^ mask[ev]))
    d = g.n * p
    bound_i = math.e ** 2 * size ** 2 * p
    if size:
        bound_ii = size * math.sqrt(3 * d * math.log(g.n * math.e / size))
    else:
        bound_ii = 0.0
    ratio = inside / boundary if boundary else float("inf") if inside else 0.0
    return P3Report(
        induced_edges=inside,
        bound_i=bound_i,
        bound_i_ok=inside <= bound_i,
        bound_ii=bound_ii,
        bound_ii_ok=inside <= bound_ii,
        boundary_edges=boundary,
        ratio=ratio,
    )
