"""Approximate chain-recurrence classes from a box discretization.

Box B has an edge to every box meeting the eps-neighbourhood of a cube
enclosing f(B).  The cube is centred at f(center of B) with per-axis
half-widths read off the images of the corners of B, which is exact for
affine and monotone maps.  Any eps-pseudo-orbit step x -> y with x in B,
y in B' is then an edge B -> B', so recurrence is never missed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import DomainEscape, InvalidArgument
from .maps import Domain, SampledMap

_ESCAPE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class BoxGrid:
    domain: Domain
    resolution: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    @property
    def widths(self) -> np.ndarray:
        return self.domain.width / np.array(self.resolution)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    def multi_index(self, flat) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(flat), self.resolution), axis=-1)

    @cached_property
    def centers(self) -> np.ndarray:
        idx = self.multi_index(np.arange(self.size))
        return np.array(self.domain.low) + (idx + 0.5) * self.widths

    def box_of(self, pts: np.ndarray) -> np.ndarray:
        """Flat index of the box containing each point (points assumed inside)."""
        rel = (np.atleast_2d(pts) - np.array(self.domain.low)) / self.widths
        idx = np.clip(np.floor(rel).astype(int), 0, np.array(self.resolution) - 1)
        return np.ravel_multi_index(tuple(idx.T), self.resolution)


@dataclass(frozen=True, eq=False)
class ChainGraph:
    grid: BoxGrid
    epsilon: float
    adjacency: csr_matrix
    labels: np.ndarray
    classes: tuple[tuple[int, ...], ...]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @cached_property
    def recurrent(self) -> np.ndarray:
        """Boolean mask of chain-recurrent boxes."""
        mask = np.zeros(self.grid.size, dtype=bool)
        for cls in self.classes:
            mask[list(cls)] = True
        return mask

    def class_of(self) -> np.ndarray:
        """Class number per box, -1 outside the chain-recurrent set."""
        out = np.full(self.grid.size, -1)
        for k, cls in enumerate(self.classes):
            out[list(cls)] = k
        return out

    def edges(self) -> np.ndarray:
        coo = self.adjacency.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.column_stack([coo.row[order], coo.col[order]])

    def successors(self, box: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[box]:a.indptr[box + 1]]

    def to_record(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "resolution": list(self.grid.resolution),
            "domain": self.grid.domain.to_record(),
            "boxes": self.grid.size,
            "edges": int(self.adjacency.nnz),
            "n_classes": self.n_classes,
            "class_sizes": [len(c) for c in self.classes],
            "classes": [[int(c[0]), int(c[-1])] for c in self.classes],
        }

    def nodes_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        m = self.grid.domain.dim
        w.writerow(["box"] + [f"i{a}" for a in range(m)] + [f"c{a}" for a in range(m)] + ["class"])
        mi = self.grid.multi_index(np.arange(self.grid.size))
        cls = self.class_of()
        for b in range(self.grid.size):
            w.writerow([b, *mi[b].tolist(), *[format(x, ".17g") for x in self.grid.centers[b]], int(cls[b])])
        return buf.getvalue()

    def edges_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "target"])
        w.writerows(self.edges().tolist())
        return buf.getvalue()


def _resolution(res, dim: int) -> tuple[int, ...]:
    res = (res,) * dim if np.isscalar(res) else tuple(res)
    if len(res) != dim or any(int(r) != r or r < 2 for r in res):
        raise InvalidArgument(f"resolution must be an integer >= 2 per axis, got {res}")
    return tuple(int(r) for r in res)


def _axis_range(lo: int, hi: int, n: int, periodic: bool) -> np.ndarray:
    if periodic:
        if hi - lo + 1 >= n:
            return np.arange(n)
        return np.mod(np.arange(lo, hi + 1), n)
    return np.arange(max(lo, 0), min(hi, n - 1) + 1)


def build_box_edges(fmap: SampledMap, grid: BoxGrid, epsilon: float) -> tuple[csr_matrix, np.ndarray]:
    """Outer edge relation, plus a mask of boxes containing a sampled point that
    an eps-step can return to its own box from."""
    dom = grid.domain
    centers = grid.centers
    half = grid.widths / 2
    img = fmap(centers)
    low, high = np.array(dom.low), np.array(dom.high)
    fixed = ~np.array(dom.periodic)
    out = np.any(fixed & ((img < low - _ESCAPE_SLACK) | (img > high + _ESCAPE_SLACK)), axis=1)
    if np.any(out):
        boxes = np.flatnonzero(out)
        raise DomainEscape(f"{len(boxes)} box images leave the domain (first: {boxes[:5].tolist()})",
                           boxes.tolist())
    img = dom.wrap(img)
    # half-extent of f(B) per axis from all corners, pulled a hair inside the half-open box
    reach = np.zeros_like(img)
    m = dom.dim
    moved = np.abs(dom.displacement(centers, img)).max(axis=1)
    signs_seen = [np.sign(dom.displacement(centers, img))]
    for signs in np.array(np.meshgrid(*[[-1.0, 1.0]] * m, indexing="ij")).reshape(m, -1).T:
        corner = dom.wrap(centers + signs * half * (1 - 1e-9))
        f_corner = fmap(corner)
        reach = np.maximum(reach, np.abs(dom.displacement(img, f_corner)))
        step = dom.displacement(corner, f_corner)
        moved = np.minimum(moved, np.abs(step).max(axis=1))
        signs_seen.append(np.sign(step))
    # a sampled point moving less than eps, or a displacement changing sign on every axis
    sg = np.stack(signs_seen)
    straddles = np.all((sg.max(axis=0) >= 0) & (sg.min(axis=0) <= 0), axis=1)
    witnessed = (moved < epsilon) | straddles
    radius = epsilon + reach
    rel_lo = (img - radius - low) / grid.widths
    rel_hi = (img + radius - low) / grid.widths
    lo_idx = np.floor(rel_lo).astype(int)
    hi_idx = np.floor(rel_hi).astype(int)
    rows, cols = [], []
    res = grid.resolution
    for b in range(grid.size):
        axes = [_axis_range(lo_idx[b, a], hi_idx[b, a], res[a], dom.periodic[a]) for a in range(dom.dim)]
        targets = np.ravel_multi_index(np.ix_(*axes), res).ravel()
        rows.append(np.full(targets.size, b))
        cols.append(targets)
    rows_a, cols_a = np.concatenate(rows), np.concatenate(cols)
    adj = csr_matrix((np.ones(rows_a.size, dtype=np.int8), (rows_a, cols_a)), shape=(grid.size, grid.size))
    adj.sum_duplicates()
    adj.sort_indices()
    return adj, witnessed


def _classes(adj: csr_matrix, witnessed: np.ndarray) -> tuple[np.ndarray, tuple[tuple[int, ...], ...]]:
    _, labels = connected_components(adj, directed=True, connection="strong")
    sizes = np.bincount(labels)
    # a lone box counts only if its self-loop is backed by a sampled near-fixed point;
    # the box inflation alone creates loops at the rim of every attractor
    loops = (adj.diagonal() != 0) & witnessed
    keep = {lab for lab in range(len(sizes)) if sizes[lab] > 1}
    keep |= {int(labels[b]) for b in np.flatnonzero(loops)}
    groups = [tuple(int(b) for b in np.flatnonzero(labels == lab)) for lab in keep]
    groups.sort(key=lambda g: g[0])
    return labels, tuple(groups)


def build_chain_graph(fmap: SampledMap, resolution, epsilon: float, domain: Domain | None = None) -> ChainGraph:
    if not epsilon > 0:
        raise InvalidArgument("epsilon must be positive")
    dom = domain or fmap.domain
    if dom.dim != fmap.domain.dim:
        raise InvalidArgument("domain dimension does not match the map")
    grid = BoxGrid(dom, _resolution(resolution, dom.dim))
    adj, witnessed = build_box_edges(fmap if domain is None else SampledMap(fmap.name, dom, fmap.func),
                                     grid, float(epsilon))
    labels, classes = _classes(adj, witnessed)
    return ChainGraph(grid, float(epsilon), adj, labels, classes)


@dataclass(frozen=True)
class EpsilonSweep:
    epsilons: tuple[float, ...]
    counts: tuple[int, ...]
    refines: bool
    graphs: tuple[ChainGraph, ...]

    def to_record(self) -> dict:
        return {"epsilons": list(self.epsilons), "counts": list(self.counts), "refinement_certificate": self.refines}


def refines(fine: ChainGraph, coarse: ChainGraph) -> bool:
    """Every class of ``fine`` lies inside a single class of ``coarse``."""
    owner = coarse.class_of()
    for cls in fine.classes:
        hosts = set(owner[list(cls)].tolist())
        if len(hosts) != 1 or -1 in hosts:
            return False
    return True


def class_count_across_epsilon(fmap: SampledMap, resolution, epsilons: Sequence[float],
                               domain: Domain | None = None) -> EpsilonSweep:
    eps = [float(e) for e in epsilons]
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidArgument("epsilons must be positive and strictly descending")
    graphs = tuple(build_chain_graph(fmap, resolution, e, domain) for e in eps)
    ok = all(refines(graphs[k + 1], graphs[k]) for k in range(len(graphs) - 1))
    return EpsilonSweep(tuple(eps), tuple(g.n_classes for g in graphs), ok, graphs)


def closure(adj: csr_matrix, seeds: Iterable[int]) -> np.ndarray:
    """Mask of boxes reachable from the seeds (seeds included)."""
    mask = np.zeros(adj.shape[0], dtype=bool)
    for s in seeds:
        if not mask[s]:
            mask[breadth_first_order(adj, int(s), directed=True, return_predecessors=False)] = True
    return mask


@dataclass(frozen=True)
class FiltratingVerdict:
    holds: bool
    u_plus: tuple[int, ...]
    u_minus: tuple[int, ...]
    extra: tuple[int, ...]

    def to_record(self) -> dict:
        return {"holds": self.holds, "u_plus": len(self.u_plus), "u_minus": len(self.u_minus),
                "extra_boxes": list(self.extra[:20])}


def certify_filtrating(g: ChainGraph, boxes: Iterable[int]) -> FiltratingVerdict:
    """U is filtrating iff U = U_+ & U_- with U_+ its forward and U_- its backward closure."""
    u = np.zeros(g.grid.size, dtype=bool)
    idx = np.fromiter((int(b) for b in boxes), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= g.grid.size):
        raise InvalidArgument("candidate boxes outside the grid")
    u[idx] = True
    plus = closure(g.adjacency, np.flatnonzero(u))
    minus = closure(g.adjacency.T.tocsr(), np.flatnonzero(u))
    extra = np.flatnonzero(plus & minus & ~u)
    return FiltratingVerdict(not extra.size, tuple(np.flatnonzero(plus).tolist()),
                             tuple(np.flatnonzero(minus).tolist()), tuple(extra.tolist()))
