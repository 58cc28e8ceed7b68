"""Solve the cube for phases that make every walk return at t = pi.

Run: python demos/cube_return_gate.py
"""

from __future__ import annotations

import math

import numpy as np

from branchwalk import gate_check, return_amplitude, solve_return_walk, split_cube

for args in ((math.sqrt(3), math.sqrt(3), 2.0, 2, 4),
             (math.sqrt(1.5), math.sqrt(1.5), math.sqrt(2), 1, 3)):
    sol = solve_return_walk(*args)
    a, b, c, n, m = args
    print(f"a={a:.4f} b={b:.4f} c={c:.4f} n={n} m={m}")
    print("  face fluxes:", ", ".join(f"{p:.4f}" for p in sol.phi))
    for chain in split_cube(sol.amplitudes).chains:
        print(f"  chain from {chain.start_label}:", ", ".join(f"{w:.6f}" for w in chain.hoppings))
    ok, sign, dev = gate_check(sol)
    print(f"  exp(-i pi H) = {'+' if sign > 0 else '-'}I: {ok} (max deviation {dev:.1e})")

    trace = return_amplitude(sol.graph(), "111", np.linspace(0, math.pi, 7))
    print("  |<111|U(t)|111>| on [0, pi]:", " ".join(f"{abs(z):.3f}" for z in trace.amplitudes))

# with the one-chain phase choice only walks started on the 111 chain return
sol = solve_return_walk(math.sqrt(3), math.sqrt(3), 2.0, 2, 4, mirror=False)
print("one-chain phases, gate on full cube:", gate_check(sol)[0])
