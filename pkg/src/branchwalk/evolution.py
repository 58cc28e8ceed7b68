"""Continuous-time walk propagation through the Hermitian eigensystem."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from ._jsonfmt import fmt_float
from .errors import DimensionMismatch, UnknownNode
from .graph import WeightedGraph

__all__ = [
    "Spectrum",
    "WalkTrace",
    "propagator",
    "return_amplitude",
    "transfer_amplitude",
    "is_identity_up_to_sign",
    "compare_walks",
    "default_times",
]

# tolerances per composition layer
CONGRUENCE_TOL = 1e-10
DYNAMICS_TOL = 1e-9
GATE_TOL = 1e-8


def _matrix(g):
    if isinstance(g, WeightedGraph):
        return g.matrix()
    return np.asarray(g, dtype=complex)


class Spectrum:
    """Eigen-decomposition of a Hermitian matrix, computed once and reused.

    Parameters
    ----------
    h : array_like or WeightedGraph
        Hermitian Hamiltonian.
    """

    def __init__(self, h):
        h = _matrix(h)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DimensionMismatch(f"Hamiltonian must be square, got shape {h.shape}")
        try:
            self.energies, self.vectors = np.linalg.eigh(h)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise RuntimeError(f"Hermitian eigensolver failed: {exc}") from exc
        self.size = h.shape[0]

    def propagator(self, t) -> np.ndarray:
        """``U(t) = V diag(exp(-i E t)) V^dagger``."""
        if not math.isfinite(t):
            raise ValueError(f"time must be finite, got {t!r}")
        if t == 0:
            return np.eye(self.size, dtype=complex)
        phases = np.exp(-1j * self.energies * t)
        return (self.vectors * phases) @ self.vectors.conj().T

    def evolve(self, state, t) -> np.ndarray:
        if t == 0:
            return np.asarray(state, dtype=complex).copy()
        coeffs = self.vectors.conj().T @ state
        return self.vectors @ (np.exp(-1j * self.energies * t) * coeffs)


def propagator(g, t) -> np.ndarray:
    return Spectrum(g).propagator(t)


@dataclass(frozen=True)
class WalkTrace:
    times: tuple
    amplitudes: tuple
    source: str
    target: str

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("t,re,im,abs\n")
        for t, z in zip(self.times, self.amplitudes):
            out.write(",".join(fmt_float(v) for v in (t, z.real, z.imag, abs(z))) + "\n")
        return out.getvalue()


def transfer_amplitude(g: WeightedGraph, source, target, times, scale=1.0) -> WalkTrace:
    """Trace of ``<target|U(t)|source>``; ``scale`` multiplies ``H`` first
    (use ``scale = tau / pi`` style rescalings to get a dimensionless ``H'``)."""
    for label in (source, target):
        if label not in g.index:
            raise UnknownNode(f"unknown node {label!r}")
    spec = Spectrum(g.matrix() * scale)
    s = g.basis_vector(source)
    j = g.index[target]
    amps = tuple(complex(spec.evolve(s, float(t))[j]) for t in times)
    return WalkTrace(tuple(float(t) for t in times), amps, source, target)


def return_amplitude(g: WeightedGraph, node, times, scale=1.0) -> WalkTrace:
    return transfer_amplitude(g, node, node, times, scale)


def is_identity_up_to_sign(u, tol=GATE_TOL):
    """``(True, +1)`` if ``U ~ I``, ``(True, -1)`` if ``U ~ -I``, else ``(False, 0)``."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {u.shape}")
    eye = np.eye(u.shape[0])
    if np.max(np.abs(u - eye), initial=0.0) < tol:
        return True, 1
    if np.max(np.abs(u + eye), initial=0.0) < tol:
        return True, -1
    return False, 0


def default_times(tmax=10.0, steps=64, include_pi=True):
    times = list(np.linspace(0.0, tmax, steps)) if steps > 1 else [0.0]
    if include_pi and math.pi not in times:
        times.append(math.pi)
    return sorted(float(t) for t in times)


def compare_walks(g_original: WeightedGraph, decomposition, times, tol=DYNAMICS_TOL) -> dict:
    """Compare walk amplitudes before and after a basis change.

    ``decomposition`` is anything with a ``transform`` (:class:`BasisTransform`)
    and a ``hamiltonian()`` in the new basis, i.e. a chain decomposition or a
    rewrite result. Amplitudes ``<n|U(t)|s>`` are compared for every pair of
    nodes left in place by the transform, plus the first chain's start node.
    """
    t = decomposition.transform
    h_new = np.asarray(decomposition.hamiltonian())
    n_old = g_original.size
    if t.matrix.shape != (h_new.shape[0], n_old) or tuple(t.old_labels) != tuple(g_original.nodes):
        raise DimensionMismatch(
            f"transform maps {len(t.old_labels)} nodes to {len(t.new_labels)} states, "
            f"graph has {n_old} nodes and reduced Hamiltonian is {h_new.shape}"
        )

    tracked = list(t.fixed_nodes())
    chains = getattr(decomposition, "chains", None)
    if chains:
        start = chains[0].start_label
        if start in g_original.index and start not in tracked:
            tracked.insert(0, start)

    orig = Spectrum(g_original.matrix())
    red = Spectrum(h_new)
    idx = [g_original.index[label] for label in tracked]
    old_states = np.eye(n_old, dtype=complex)[:, idx]
    new_states = t.matrix @ old_states
    worst = 0.0
    for time in times:
        u_old = orig.propagator(float(time))
        u_new = red.propagator(float(time))
        a = old_states.conj().T @ u_old @ old_states
        b = new_states.conj().T @ u_new @ new_states
        worst = max(worst, float(np.max(np.abs(a - b), initial=0.0)))
    return {"tracked": tracked, "max_deviation": worst, "ok": worst < tol}
