"""Unitary maps between the node basis of a graph and a rotated basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class BasisTransform:
    """Rows of ``matrix`` are the bras of the new states.

    ``matrix[j, i] = <new_j|old_i>``, so a Hamiltonian written in the old node
    basis becomes ``matrix @ H @ matrix.conj().T`` in the new one, and an old
    state vector ``v`` has new-basis coordinates ``matrix @ v``.
    ``chains[j]`` is the chain index of new state ``j`` (``None`` for local
    rewrites, which keep the graph shape rather than producing chains).
    """

    matrix: np.ndarray
    old_labels: tuple
    new_labels: tuple
    chains: tuple | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "old_labels", tuple(self.old_labels))
        object.__setattr__(self, "new_labels", tuple(self.new_labels))
        if m.shape != (len(self.new_labels), len(self.old_labels)):
            raise ValueError(
                f"transform shape {m.shape} does not match "
                f"{len(self.new_labels)} new x {len(self.old_labels)} old labels"
            )

    def apply(self, h):
        t = self.matrix
        return t @ np.asarray(h) @ t.conj().T

    def map_state(self, v):
        return self.matrix @ np.asarray(v)

    def unitarity_error(self) -> float:
        t = self.matrix
        eye = np.eye(t.shape[0])
        return float(np.max(np.abs(t @ t.conj().T - eye), initial=0.0))

    def fixed_nodes(self, atol=0.0) -> list[str]:
        """Old labels whose state is left exactly in place (same label, unit row)."""
        fixed = []
        new_index = {label: j for j, label in enumerate(self.new_labels)}
        for i, label in enumerate(self.old_labels):
            j = new_index.get(label)
            if j is None:
                continue
            row = np.zeros(len(self.old_labels), dtype=complex)
            row[i] = 1.0
            if np.max(np.abs(self.matrix[j] - row)) <= atol:
                fixed.append(label)
        return fixed


def embed(labels, block_labels, block) -> np.ndarray:
    """Identity on ``labels`` except a unitary ``block`` acting on ``block_labels``.

    ``block[r]`` lists the coefficients (in the order of ``block_labels``) of the
    bra of the r-th new state; new state r takes the slot of ``block_labels[r]``.
    """
    index = {label: i for i, label in enumerate(labels)}
    t = np.eye(len(labels), dtype=complex)
    slots = [index[b] for b in block_labels]
    for r, slot in enumerate(slots):
        t[slot, :] = 0.0
        for c, col in enumerate(slots):
            t[slot, col] = block[r][c]
    return t
