"""Apply local rewrites by hand: fold two branches into a loop and open it again.

Run: python demos/local_rewrites.py
"""

from __future__ import annotations

import numpy as np

from branchwalk import (
    branches_to_fourloop,
    build_graph,
    compare_walks,
    fourloop_to_branches,
    shift_one_segment_branch,
)


def show(title, result):
    print(title)
    for name, value in result.report:
        print(f"  {name:8s} {value:.4f}")


# a pendant 1' on node 1 of the path 1-2-3 moves one step down the chain
g = build_graph(["1", "2", "1'", "3"], [("1", "2", 3), ("1", "1'", 4), ("2", "3", 1)])
r = shift_one_segment_branch(g, {"1": "1", "2": "2", "1'": "1'", "3": "3"})
show("one-segment branch", r)
print("  walk deviation:", f"{compare_walks(g, r, np.linspace(0, 8, 40))['max_deviation']:.1e}")

# two pendants fold into a four-segment loop, which opens back into branches
g = build_graph(
    ["1", "2", "1'", "3", "2'", "4"],
    [("1", "2", 0.8), ("1", "1'", 0.6j), ("2", "3", 1.1), ("2", "2'", 0.4), ("3", "4", 1.0)],
)
site = {"1": "1", "2": "2", "1'": "1'", "3": "3", "2'": "2'", "4": "4"}
loop = branches_to_fourloop(g, site)
show("branches -> loop", loop)
back = fourloop_to_branches(loop.graph, loop.next_site)
show("loop -> branches", back)
print("  walk deviation:", f"{compare_walks(loop.graph, back, np.linspace(0, 8, 40))['max_deviation']:.1e}")
