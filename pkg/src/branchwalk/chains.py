"""Linearization of a graph Hamiltonian into one or more chains.

The chain basis is grown from a start state by repeatedly applying ``H`` and
removing the components along the states already found (full
reorthogonalization against every previous state, not just the last two).
With real nonnegative hoppings ``Omega_k = <x_{k+1}|H|x_k>`` the Hamiltonian
restricted to the chain is tridiagonal. When a chain closes before the space
is exhausted, the next chain is seeded from the lowest-index node that still
has a component outside the span found so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _jsonfmt
from .basis import BasisTransform
from .errors import StartNotInSpace, StartNotNormalized
from .graph import WeightedGraph, build_graph

__all__ = [
    "Chain",
    "ChainDecomposition",
    "krylov_chain",
    "auxiliary_norms",
    "full_decompose",
    "verify_chain",
    "chain_matrix",
    "decomposition_to_json",
]

CUTOFF_FACTOR = 1e-12


@dataclass(frozen=True)
class Chain:
    hoppings: tuple
    diagonals: tuple
    start_label: str

    @property
    def length(self) -> int:
        return len(self.diagonals)

    def matrix(self) -> np.ndarray:
        return chain_matrix(self.hoppings, self.diagonals)


@dataclass(frozen=True, eq=False)
class ChainDecomposition:
    chains: tuple
    transform: BasisTransform
    residual_dim: int = 0
    # orthonormal chain states as columns, grouped by chain (transform = basis^H)
    basis: np.ndarray = field(default=None, repr=False)

    def hamiltonian(self) -> np.ndarray:
        """Block-tridiagonal matrix assembled from the chain hoppings alone."""
        n = sum(c.length for c in self.chains)
        h = np.zeros((n, n), dtype=complex)
        k = 0
        for c in self.chains:
            h[k:k + c.length, k:k + c.length] = c.matrix()
            k += c.length
        return h

    def to_graph(self) -> WeightedGraph:
        labels = self.transform.new_labels
        edges = []
        diag = []
        k = 0
        for c in self.chains:
            for j, om in enumerate(c.hoppings):
                edges.append((labels[k + j + 1], labels[k + j], om))
            for j, e in enumerate(c.diagonals):
                if e != 0:
                    diag.append((labels[k + j], e))
            k += c.length
        return build_graph(labels, edges, diag)


def chain_matrix(hoppings, diagonals=None) -> np.ndarray:
    n = len(hoppings) + 1
    if diagonals is None:
        diagonals = np.zeros(n)
    h = np.diag(np.asarray(diagonals, dtype=complex))
    for j, om in enumerate(hoppings):
        h[j + 1, j] = om
        h[j, j + 1] = np.conj(om)
    return h


def _default_cutoff(h) -> float:
    scale = float(np.max(np.abs(h), initial=0.0))
    return CUTOFF_FACTOR * (scale if scale > 0 else 1.0)


def _state_vector(g: WeightedGraph, start) -> np.ndarray:
    if isinstance(start, str):
        if start not in g.index:
            raise StartNotInSpace(f"start node {start!r} is not in the graph")
        return g.basis_vector(start)
    if isinstance(start, dict):
        v = np.zeros(g.size, dtype=complex)
        for label, coeff in start.items():
            if label not in g.index:
                raise StartNotInSpace(f"start state refers to unknown node {label!r}")
            v[g.index[label]] = coeff
        return v
    v = np.asarray(start, dtype=complex)
    if v.shape != (g.size,):
        raise StartNotInSpace(f"start vector has shape {v.shape}, graph has {g.size} nodes")
    return v


def _project_out(v, q):
    # two passes of classical Gram-Schmidt ("twice is enough")
    if q.shape[1] == 0:
        return v
    for _ in range(2):
        v = v - q @ (q.conj().T @ v)
    return v


def _grow(h, x1, cutoff, previous):
    """Grow one chain from normalized ``x1`` keeping orthogonality to ``previous``."""
    n = h.shape[0]
    states = [x1]
    hoppings = []
    diagonals = []
    while True:
        xk = states[-1]
        hx = h @ xk
        alpha = float(np.real(np.vdot(xk, hx)))
        diagonals.append(alpha)
        if len(states) + previous.shape[1] >= n:
            break
        r = hx - alpha * xk
        if len(states) > 1:
            r = r - hoppings[-1] * states[-2]
        r = _project_out(r, np.column_stack([previous] + states))
        beta = float(np.linalg.norm(r))
        if beta <= cutoff:
            break
        hoppings.append(beta)
        states.append(r / beta)
    return states, hoppings, diagonals


def krylov_chain(g, start, cutoff=None):
    """Build the chain that starts at ``start``.

    ``start`` is a node label, a ``{label: amplitude}`` mapping or a full state
    vector; it must be normalized to 1e-12. Returns ``(chain, states)`` where
    ``states`` holds the chain states as columns in the node basis.
    """
    h = g.matrix() if isinstance(g, WeightedGraph) else np.asarray(g, dtype=complex)
    if not isinstance(g, WeightedGraph):
        g = None
    if g is not None:
        x1 = _state_vector(g, start)
        label = start if isinstance(start, str) else "start"
    else:
        x1 = np.asarray(start, dtype=complex)
        label = "start"
    norm = np.linalg.norm(x1)
    if abs(norm - 1.0) > 1e-12:
        raise StartNotNormalized(f"start state has norm {norm:.17g}")
    if cutoff is None:
        cutoff = _default_cutoff(h)
    empty = np.zeros((h.shape[0], 0), dtype=complex)
    states, hoppings, diagonals = _grow(h, x1.astype(complex), cutoff, empty)
    chain = Chain(tuple(hoppings), tuple(diagonals), label)
    return chain, np.column_stack(states)


def auxiliary_norms(g, start, length):
    """Norms ``N_1..N_length`` of the non-normalized recursion.

    ``y_1 = x_1``, ``y_2 = H y_1 - alpha_1 y_1`` and
    ``y_{i+1} = H y_i - alpha_i y_i - (N_i / N_{i-1})^2 y_{i-1}`` with
    ``alpha_i = <y_i|H|y_i> / N_i^2`` (zero on bipartite graphs). The hopping
    of the normalized chain is ``N_{j+1} / N_j``. No reorthogonalization is
    done, so this is only meant as an independent check on short chains.
    """
    h = g.matrix() if isinstance(g, WeightedGraph) else np.asarray(g, dtype=complex)
    y_prev = None
    y = _state_vector(g, start) if isinstance(g, WeightedGraph) else np.asarray(start, dtype=complex)
    norms = [float(np.linalg.norm(y))]
    for _ in range(length - 1):
        hy = h @ y
        alpha = np.vdot(y, hy).real / norms[-1] ** 2
        nxt = hy - alpha * y
        if y_prev is not None:
            nxt = nxt - (norms[-1] / norms[-2]) ** 2 * y_prev
        y_prev, y = y, nxt
        norms.append(float(np.linalg.norm(y)))
    return norms


def full_decompose(g: WeightedGraph, start, cutoff=None) -> ChainDecomposition:
    """Split the whole space into chains, the first one starting at ``start``."""
    if start not in g.index:
        raise StartNotInSpace(f"start node {start!r} is not in the graph")
    h = g.matrix()
    n = g.size
    if cutoff is None:
        cutoff = _default_cutoff(h)

    chains = []
    columns = []
    chain_ids = []
    basis = np.zeros((n, 0), dtype=complex)
    seed = g.basis_vector(start)
    seed_label = start
    while True:
        states, hoppings, diagonals = _grow(h, seed, cutoff, basis)
        chains.append(Chain(tuple(hoppings), tuple(diagonals), seed_label))
        chain_ids.extend([len(chains) - 1] * len(states))
        columns.extend(states)
        basis = np.column_stack(columns)
        if basis.shape[1] >= n:
            break
        seed = None
        for label in g.nodes:
            r = _project_out(g.basis_vector(label), basis)
            norm = np.linalg.norm(r)
            if norm > cutoff:
                seed = r / norm
                exact = np.max(np.abs(r - g.basis_vector(label))) <= cutoff
                seed_label = label if exact else f"{label}^perp"
                break
        if seed is None:
            break

    residual = n - basis.shape[1]
    labels = []
    for ci, c in enumerate(chains):
        labels.extend(f"c{ci}.{k}" for k in range(c.length))
    transform = BasisTransform(basis.conj().T, g.nodes, labels, tuple(chain_ids))
    return ChainDecomposition(tuple(chains), transform, residual, basis)


def verify_chain(g: WeightedGraph, decomposition: ChainDecomposition, times=(), tol=1e-9) -> dict:
    """Check a decomposition against its source graph.

    Reports the unitarity error of the transform, the largest entrywise
    deviation between ``T H T^dagger`` and the chain matrix, and the largest
    deviation between the return amplitude of the first chain's start node in
    the original graph and at the first chain site.
    """
    from .evolution import Spectrum  # local import: evolution depends on graph only

    t = decomposition.transform
    report = {"unitarity": t.unitarity_error()}
    h_chain = decomposition.hamiltonian()
    if t.matrix.shape[0] != h_chain.shape[0] or t.matrix.shape[1] != g.size:
        report["congruence"] = math.inf
        report["return_amplitude"] = math.inf
        report["ok"] = False
        return report
    report["congruence"] = float(np.max(np.abs(t.apply(g.matrix()) - h_chain), initial=0.0))

    start = decomposition.chains[0].start_label
    dev = 0.0
    if times and start in g.index:
        orig = Spectrum(g.matrix())
        red = Spectrum(h_chain)
        s_old = g.basis_vector(start)
        s_new = t.map_state(s_old)
        for time in times:
            u0 = np.vdot(s_old, orig.evolve(s_old, time))
            u1 = np.vdot(s_new, red.evolve(s_new, time))
            dev = max(dev, abs(u0 - u1))
    report["return_amplitude"] = float(dev)
    report["ok"] = bool(
        report["unitarity"] < 1e-10 and report["congruence"] < max(tol, 1e-10) and dev < tol
    )
    return report


def decomposition_to_json(d: ChainDecomposition) -> str:
    t = d.transform
    doc = {
        "chains": [
            {"start": c.start_label, "hoppings": list(c.hoppings), "diagonals": list(c.diagonals)}
            for c in d.chains
        ],
        "labels": list(t.old_labels),
        "basis": [[[z.real, z.imag] for z in row] for row in t.matrix],
    }
    return _jsonfmt.dumps(doc)
