"""Local basis rotations that simplify branches and loops of a walk graph.

Each rewrite takes a graph plus a *site* (a mapping from pattern role to node
label), rotates a pair of pattern nodes into new orthonormal states and
returns a :class:`RewriteResult`. Nothing outside the rotated nodes changes,
so walks that start and end on untouched nodes are preserved exactly.

Role names follow the node names used for each pattern (``"1"``, ``"1'"``,
``"2'"``, ...). ``"1p"``, ``"1prime"`` and ``"node1prime"`` are accepted as
spellings of ``"1'"``.

Edge amplitudes are read with the package-wide orientation: the amplitude of
role edge ``(u, v)`` is ``<u|H|v>``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .basis import BasisTransform, embed
from .errors import (
    ChoiceOutOfRange,
    ConditionViolated,
    DegenerateAmplitudes,
    DivisionByZeroOperand,
    PatternMismatch,
)
from .graph import Edge, WeightedGraph, build_graph

__all__ = [
    "RewriteResult",
    "ConditionCheck",
    "shift_one_segment_branch",
    "reduce_three_loop",
    "branches_to_fourloop",
    "fourloop_to_branches",
    "rhomboid_reduce",
    "rhomboid_expand",
    "sixloop_reduce",
    "check_condition",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RewriteResult:
    graph: WeightedGraph
    transform: BasisTransform
    report: tuple
    # role map for the natural next rewrite on the produced pattern, if any
    next_site: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "report", tuple((str(k), complex(v)) for k, v in self.report))

    def value(self, symbol) -> complex:
        for name, v in self.report:
            if name == symbol:
                return v
        raise KeyError(symbol)

    def hamiltonian(self):
        return self.graph.matrix()


class ConditionCheck(NamedTuple):
    holds: bool
    residual: float
    scale: float
    lhs: complex
    rhs: complex

    def __bool__(self):
        return self.holds


# -- site handling ---------------------------------------------------------

def _canonical_role(role: str) -> str:
    r = str(role).strip()
    if r.startswith("node"):
        r = r[4:]
    r = re.sub(r"(prime|p)$", "'", r)
    return r


def _resolve(g: WeightedGraph, site, roles, optional=()):
    given = {_canonical_role(k): str(v) for k, v in dict(site).items()}
    unknown = set(given) - set(roles) - set(optional)
    if unknown:
        raise PatternMismatch(f"unexpected roles {sorted(unknown)}; pattern uses {list(roles)}")
    missing = [r for r in roles if r not in given]
    if missing:
        raise PatternMismatch(f"site is missing roles {missing}")
    for role, label in given.items():
        if label not in g.index:
            raise PatternMismatch(f"role {role!r} maps to unknown node {label!r}")
    labels = list(given.values())
    if len(set(labels)) != len(labels):
        raise PatternMismatch("site maps two roles to the same node")
    return given


def _check_shape(g, site, pattern_edges, rotated, allow_diag=()):
    """Verify the induced subgraph and isolation of the rotated nodes.

    ``pattern_edges`` lists the role pairs that may carry an amplitude; any
    other coupling between pattern nodes is a mismatch, as is any coupling
    from a rotated node to the outside or a diagonal on a rotated role not in
    ``allow_diag``.
    """
    h = g.matrix()
    allowed = {frozenset(p) for p in pattern_edges}
    roles = list(site)
    for i, ru in enumerate(roles):
        for rv in roles[i + 1:]:
            if frozenset((ru, rv)) in allowed:
                continue
            if h[g.index[site[ru]], g.index[site[rv]]] != 0:
                raise PatternMismatch(
                    f"unexpected edge between roles {ru!r} and {rv!r} "
                    f"({site[ru]!r}-{site[rv]!r})"
                )
    inside = set(site.values())
    for role in rotated:
        label = site[role]
        for nb in g.neighbors(label):
            if nb not in inside:
                raise PatternMismatch(
                    f"node {label!r} (role {role!r}) couples to {nb!r} outside the pattern"
                )
        if role not in allow_diag and h[g.index[label], g.index[label]] != 0:
            raise PatternMismatch(f"node {label!r} (role {role!r}) carries a self-loop")


def _amp(g, site, u, v) -> complex:
    return g.element(site[u], site[v])


def _fresh(g: WeightedGraph, stems, names=None):
    if names is not None:
        names = [str(n) for n in names]
        if len(names) != len(stems):
            raise ValueError(f"expected {len(stems)} names, got {len(names)}")
        return names
    k = 1
    while True:
        candidate = [s.replace("#", str(k)) for s in stems]
        if not any(c in g.index for c in candidate):
            return candidate
        k += 1


def _rebuild(g, site, rotated, new_labels, block, new_edges, new_diag=()):
    """Assemble the rewritten graph and its basis transform."""
    old_rot = [site[r] for r in rotated]
    rename = dict(zip(old_rot, new_labels))
    nodes = [rename.get(label, label) for label in g.nodes]
    gone = set(old_rot)
    edges = [e for e in g.edges if e.source not in gone and e.target not in gone]
    edges += [Edge(u, v, amp) for u, v, amp in new_edges if amp != 0]
    diag = [(label, e) for label, e in g.diag if label not in gone]
    diag += [(label, e) for label, e in new_diag if e != 0]
    graph = build_graph(nodes, edges, diag)
    transform = BasisTransform(embed(g.nodes, old_rot, block), g.nodes, nodes)
    return graph, transform


def _norm2(*zs) -> float:
    return math.sqrt(sum(abs(z) ** 2 for z in zs))


# -- one-segment branch -----------------------------------------------------

def shift_one_segment_branch(g: WeightedGraph, site, *, names=None) -> RewriteResult:
    """Move a one-segment branch two nodes along the chain.

    Pattern: ``1 -a- 2 -b- 3`` with a pendant ``1 -a'- 1'``. Nodes ``2`` and
    ``1'`` are rotated into ``x`` (attached to ``1`` with ``Omega_x``) and ``x'``,
    which ends up as a pendant of ``3``.
    """
    site = _resolve(g, site, ("1", "2", "1'", "3"))
    _check_shape(g, site, [("1", "2"), ("1", "1'"), ("2", "3")], rotated=("2", "1'"))
    a = _amp(g, site, "1", "2")
    ap = _amp(g, site, "1", "1'")
    b = _amp(g, site, "2", "3")
    om = _norm2(a, ap)
    if om == 0:
        raise DegenerateAmplitudes("a = a' = 0: the branch is not attached to node 1")

    x, xp = _fresh(g, ("x#", "x#'"), names)
    block = [[a / om, ap / om], [ap.conjugate() / om, -a.conjugate() / om]]
    x3 = a * b / om
    three_xp = ap * b.conjugate() / om
    one = site["1"]
    three = site["3"]
    graph, transform = _rebuild(
        g, site, ("2", "1'"), (x, xp), block,
        [(one, x, om), (x, three, x3), (three, xp, three_xp)],
    )
    report = (("Omega_x", complex(om)), ("x->3", x3), ("3->x'", three_xp))
    return RewriteResult(graph, transform, report)


# -- three-segment loop -----------------------------------------------------

def reduce_three_loop(g: WeightedGraph, site, e1prime=None, *, names=None) -> RewriteResult:
    """Shift an edge-sharing triangle up the chain, creating self-loops.

    Pattern: ``1 -a- 2 -b- 3`` plus ``1 -a'- 1'`` and ``1' -b'- 2``. A self-loop
    ``E1'`` on ``1'`` is taken from the graph; ``e1prime``, when given, must
    match it. Reported ``E_x``/``E_x'`` follow the ``E |x><x| + h.c.``
    bookkeeping (so the stored diagonal energy is ``2 Re E``); without ``E1'``
    they are exact negatives of each other.
    """
    site = _resolve(g, site, ("1", "2", "1'", "3"))
    _check_shape(g, site, [("1", "2"), ("1", "1'"), ("1'", "2"), ("2", "3")],
                 rotated=("2", "1'"), allow_diag=("1'",))
    a = _amp(g, site, "1", "2")
    ap = _amp(g, site, "1", "1'")
    bp = _amp(g, site, "1'", "2")
    b = _amp(g, site, "2", "3")
    e1 = g.energy(site["1'"])
    if e1prime is not None and abs(e1prime - e1) > 1e-12 * max(1.0, abs(e1)):
        raise PatternMismatch(f"node 1' carries energy {e1!r}, expected {e1prime!r}")
    om = _norm2(a, ap)
    if om == 0:
        raise DegenerateAmplitudes("a = a' = 0: the loop is not attached to node 1")
    om2 = om * om

    A = a * b / om
    Ap = (bp * ap * ap - bp.conjugate() * a * a - e1 * a * ap) / om2
    Bp = ap.conjugate() * b / om
    core = a.conjugate() * ap * bp / om2
    Ex = core + e1 * abs(ap) ** 2 / (2 * om2)
    Exp = -core + e1 * abs(a) ** 2 / (2 * om2)

    x, xp = _fresh(g, ("x#", "x#'"), names)
    block = [[a / om, ap / om], [ap.conjugate() / om, -a.conjugate() / om]]
    one, three = site["1"], site["3"]
    graph, transform = _rebuild(
        g, site, ("2", "1'"), (x, xp), block,
        [(one, x, om), (x, three, A), (x, xp, Ap), (xp, three, Bp)],
        [(x, 2 * Ex.real), (xp, 2 * Exp.real)],
    )
    report = (
        ("Omega_x", complex(om)), ("A", A), ("A'", Ap), ("B'", Bp),
        ("E_x", Ex), ("E_x'", Exp),
    )
    return RewriteResult(graph, transform, report)


# -- four-segment edge-sharing loop -----------------------------------------

def branches_to_fourloop(g: WeightedGraph, site, *, names=None) -> RewriteResult:
    """Turn pendants on two adjacent chain nodes into a four-segment loop.

    Pattern: ``1 -a- 2 -b- 3`` with pendants ``1 -a'- 1'`` and ``2 -b'- 2'``;
    the optional role ``"4"`` names the next chain node past ``3``.
    """
    site = _resolve(g, site, ("1", "2", "1'", "3", "2'"), optional=("4",))
    edges = [("1", "2"), ("1", "1'"), ("2", "3"), ("2", "2'")]
    if "4" in site:
        edges.append(("3", "4"))
    _check_shape(g, site, edges, rotated=("2", "1'"))
    a = _amp(g, site, "1", "2")
    ap = _amp(g, site, "1", "1'")
    b = _amp(g, site, "2", "3")
    bp = _amp(g, site, "2", "2'")
    om = _norm2(a, ap)
    if om == 0:
        raise DegenerateAmplitudes("a = a' = 0: the branches are not attached to node 1")

    x, xp = _fresh(g, ("x#", "x#'"), names)
    block = [[a / om, ap / om], [ap.conjugate() / om, -a.conjugate() / om]]
    one, three, two_p = site["1"], site["3"], site["2'"]
    x3 = a * b / om
    three_xp = ap * b.conjugate() / om
    x2p = a * bp / om
    xp2p = bp * ap.conjugate() / om
    graph, transform = _rebuild(
        g, site, ("2", "1'"), (x, xp), block,
        [(one, x, om), (x, three, x3), (three, xp, three_xp), (x, two_p, x2p), (xp, two_p, xp2p)],
    )
    report = [("Omega_x", complex(om)), ("x->3", x3), ("3->x'", three_xp),
              ("x->2'", x2p), ("x'->2'", xp2p)]
    next_site = {"1": one, "x": x, "3": three, "x'": xp, "2'": two_p}
    if "4" in site:
        report.append(("c", _amp(g, site, "3", "4")))
        next_site["4"] = site["4"]
    return RewriteResult(graph, transform, tuple(report), next_site)


def fourloop_to_branches(g: WeightedGraph, site, tol=DEFAULT_TOL, *, names=None) -> RewriteResult:
    """Open a four-segment edge-sharing loop into two pendants.

    Loop roles: ``1 -A- x``, ``x -B- 3``, ``3 -B'- x'``, ``x -A'- 2'``,
    ``2' -C'- x'`` and optionally ``3 -C- 4``. Only ``x`` and ``x'`` are rotated.
    Requires ``B'/B* = C'/A'*`` (relative tolerance ``tol``) unless the loop
    is open: ``B' = C' = 0`` (``x'`` already detached) or ``A' = 0`` (the
    ``x - 2'`` segment is missing). An open loop is rotated the same way; there
    ``2'`` may couple to both new states, and both couplings are reported.
    """
    site = _resolve(g, site, ("1", "x", "3", "x'", "2'"), optional=("4",))
    edges = [("1", "x"), ("x", "3"), ("3", "x'"), ("x", "2'"), ("2'", "x'")]
    if "4" in site:
        edges.append(("3", "4"))
    _check_shape(g, site, edges, rotated=("x", "x'"))
    A = _amp(g, site, "1", "x")
    B = _amp(g, site, "x", "3")
    Bp = _amp(g, site, "3", "x'")
    Ap = _amp(g, site, "x", "2'")
    Cp = _amp(g, site, "2'", "x'")

    open_loop = (Bp == 0 and Cp == 0) or Ap == 0
    if not open_loop:
        try:
            check = check_condition("fourloop", {"A'": Ap, "B": B, "B'": Bp, "C'": Cp}, tol)
        except DivisionByZeroOperand as exc:
            raise ConditionViolated(
                f"loop condition undefined: {exc.operand} = 0 while the loop is closed",
                lhs=None, rhs=None,
            ) from exc
        if not check.holds:
            raise ConditionViolated(
                f"loop condition B'/B* = C'/A'* violated: {check.lhs:.17g} vs {check.rhs:.17g} "
                f"(residual {check.residual:.3g})",
                lhs=check.lhs, rhs=check.rhs,
            )
    if B == 0:
        raise DegenerateAmplitudes("B = 0: node x does not reach node 3")
    om_y = _norm2(B, Bp)

    y, yp = _fresh(g, ("y#", "y#'"), names)
    # |y> = (B|x> + B'*|x'>)/Omega_y,  |y'> = (B'|x> - B*|x'>)/Omega_y
    block = [[B.conjugate() / om_y, Bp / om_y], [Bp.conjugate() / om_y, -B / om_y]]
    a = A * B / om_y
    ap = A * Bp / om_y
    if open_loop:
        bp = (B.conjugate() * Ap + Bp * Cp.conjugate()) / om_y
        yp_2p = (Bp.conjugate() * Ap - B * Cp.conjugate()) / om_y
    else:
        bp = Ap * om_y / B
        yp_2p = 0j
    one, three, two_p = site["1"], site["3"], site["2'"]
    graph, transform = _rebuild(
        g, site, ("x", "x'"), (y, yp), block,
        [(one, y, a), (one, yp, ap), (y, three, om_y), (y, two_p, bp), (yp, two_p, yp_2p)],
    )
    report = [("Omega_y", complex(om_y)), ("a", a), ("a'", ap), ("b", complex(om_y)), ("b'", bp)]
    if open_loop:
        report.append(("y'->2'", yp_2p))
    if "4" in site:
        report.append(("c", _amp(g, site, "3", "4")))
    return RewriteResult(graph, transform, tuple(report),
                         {"1": one, "2": y, "1'": yp, "3": three, "2'": two_p})


# -- rhomboidal insertion ---------------------------------------------------

def rhomboid_reduce(g: WeightedGraph, site, *, names=None) -> RewriteResult:
    """Collapse a square attached at opposite corners ``0`` and ``2``.

    Square: ``0 -a- 1 -b- 2``, ``0 -d- 3``, ``3 -c- 2``. Corners ``1`` and ``3``
    become ``x`` (on the chain) and ``x'`` (a pendant of ``2``).
    """
    site = _resolve(g, site, ("0", "1", "2", "3"))
    _check_shape(g, site, [("0", "1"), ("1", "2"), ("3", "2"), ("0", "3")], rotated=("1", "3"))
    a = _amp(g, site, "0", "1")
    b = _amp(g, site, "1", "2")
    c = _amp(g, site, "3", "2")
    d = _amp(g, site, "0", "3")
    om = _norm2(a, d)
    if om == 0:
        raise DegenerateAmplitudes("a = d = 0: the square is not attached to node 0")
    A = om
    B = (a * b + c * d) / om
    C = (b.conjugate() * d - a * c.conjugate()) / om

    x, xp = _fresh(g, ("x#", "x#'"), names)
    block = [[a / om, d / om], [d.conjugate() / om, -a.conjugate() / om]]
    zero, two = site["0"], site["2"]
    graph, transform = _rebuild(
        g, site, ("1", "3"), (x, xp), block,
        [(zero, x, A), (x, two, B), (two, xp, C)],
    )
    report = (("Omega_x", complex(om)), ("A", complex(A)), ("B", B), ("C", C))
    return RewriteResult(graph, transform, report)


def rhomboid_expand(g: WeightedGraph, site, a_choice, argd=0.0, *, names=None) -> RewriteResult:
    """Inverse of :func:`rhomboid_reduce`.

    Branch roles: ``0 -A- x -B- 2`` with pendant ``2 -C- x'``. ``a_choice`` fixes
    the new ``0``-``1`` amplitude; ``|d| = sqrt(|A|^2 - |a|^2)`` and ``arg d = argd``.
    """
    site = _resolve(g, site, ("0", "x", "2", "x'"))
    _check_shape(g, site, [("0", "x"), ("x", "2"), ("2", "x'")], rotated=("x", "x'"))
    A = _amp(g, site, "0", "x")
    B = _amp(g, site, "x", "2")
    C = _amp(g, site, "2", "x'")
    a = complex(a_choice)
    mod_a = abs(A)
    if mod_a == 0:
        raise DegenerateAmplitudes("A = 0: node x is not attached to node 0")
    slack = mod_a * mod_a - abs(a) ** 2
    if slack < -1e-12 * mod_a * mod_a:
        raise ChoiceOutOfRange(f"|a| = {abs(a):.17g} exceeds |A| = {mod_a:.17g}")
    d = math.sqrt(max(slack, 0.0)) * complex(math.cos(argd), math.sin(argd))

    Ac = A.conjugate()
    b = a.conjugate() * B / Ac + d * C.conjugate() / mod_a
    c = d.conjugate() * B / Ac - a * C.conjugate() / mod_a

    s1, s3 = _fresh(g, ("y#", "y#'"), names)
    # |1> = (a/A)|x> + (d*/|A|)|x'>,  |3> = (d/A)|x> - (a*/|A|)|x'>
    block = [[(a / A).conjugate(), d / mod_a], [(d / A).conjugate(), -a / mod_a]]
    zero, two = site["0"], site["2"]
    graph, transform = _rebuild(
        g, site, ("x", "x'"), (s1, s3), block,
        [(zero, s1, a), (s1, two, b), (s3, two, c), (zero, s3, d)],
    )
    report = (("a", a), ("b", b), ("c", c), ("d", d))
    return RewriteResult(graph, transform, report, {"0": zero, "1": s1, "2": two, "3": s3})


# -- six-segment symmetric loop / two-segment branch ------------------------

def sixloop_reduce(g: WeightedGraph, site, *, names=None) -> RewriteResult:
    """Reduce a symmetric six-segment loop (or, with ``b' = 0``, a two-segment
    branch) to a four-segment edge-sharing loop.

    Pattern: ``0 -a- 1 -c1- 1' -a'- 3`` and ``0 -b- 2 -c2- 2' -b'- 3``.
    ``1, 2`` rotate into ``x, x'``; ``1', 2'`` into ``y, y'``. The produced loop
    ``y, 3, y', x'`` hangs off ``x``; ``next_site`` maps it onto the roles of
    :func:`fourloop_to_branches`.
    """
    site = _resolve(g, site, ("0", "1", "2", "1'", "2'", "3"))
    _check_shape(g, site,
                 [("0", "1"), ("0", "2"), ("1", "1'"), ("2", "2'"), ("1'", "3"), ("2'", "3")],
                 rotated=("1", "2", "1'", "2'"))
    a = _amp(g, site, "0", "1")
    b = _amp(g, site, "0", "2")
    c1 = _amp(g, site, "1", "1'")
    c2 = _amp(g, site, "2", "2'")
    ap = _amp(g, site, "1'", "3")
    bp = _amp(g, site, "2'", "3")
    om_x = _norm2(a, b)
    if om_x == 0:
        raise DegenerateAmplitudes("a = b = 0: the loop is not attached to node 0")
    om_y = _norm2(a * c1, b * c2)
    if om_y == 0:
        raise DegenerateAmplitudes("a c1 = b c2 = 0: the second rotation is undefined")

    x, xp, y, yp = _fresh(g, ("x#", "x#'", "y#", "y#'"), names)
    conj = np.conjugate
    block = [
        [a / om_x, b / om_x, 0, 0],
        [conj(b) / om_x, -conj(a) / om_x, 0, 0],
        [0, 0, a * c1 / om_y, b * c2 / om_y],
        [0, 0, conj(b * c2) / om_y, -conj(a * c1) / om_y],
    ]
    xy = om_y / om_x
    y_xp = a * b * (abs(c1) ** 2 - abs(c2) ** 2) / (om_x * om_y)
    xp_yp = c1 * c2 * om_x / om_y
    y3 = (a * ap * c1 + b * bp * c2) / om_y
    three_yp = (b * conj(ap) * c2 - a * conj(bp) * c1) / om_y
    zero, three = site["0"], site["3"]
    graph, transform = _rebuild(
        g, site, ("1", "2", "1'", "2'"), (x, xp, y, yp), block,
        [(zero, x, om_x), (x, y, xy), (y, xp, y_xp), (xp, yp, xp_yp), (y, three, y3), (three, yp, three_yp)],
    )
    report = (
        ("Omega_x", complex(om_x)), ("Omega_y", complex(om_y)),
        ("x->y", complex(xy)), ("y->x'", y_xp), ("x'->y'", xp_yp),
        ("y->3", y3), ("3->y'", three_yp),
    )
    return RewriteResult(graph, transform, report,
                         {"1": x, "x": y, "3": three, "x'": yp, "2'": xp})


# -- conditions ---------------------------------------------------------------

def _get(amps, key):
    for k in (key, key.replace("'", "p")):
        if k in amps:
            return complex(amps[k])
    raise KeyError(f"missing amplitude {key!r}")


def check_condition(kind, amplitudes, tol=DEFAULT_TOL) -> ConditionCheck:
    """Evaluate an equivalence condition.

    ``kind="fourloop"`` compares ``B'/B*`` with ``C'/A'*`` for the loop roles of
    :func:`fourloop_to_branches`; ``kind="two_branch"`` compares
    ``|c2|^2 |b|^2`` with ``|a|^2 |c1|^2``. The check passes when
    ``|lhs - rhs| <= tol * max(|lhs|, |rhs|, 1)``.
    """
    kind = kind.replace("-", "_")
    if kind == "fourloop":
        Ap, B, Bp, Cp = (_get(amplitudes, k) for k in ("A'", "B", "B'", "C'"))
        if B == 0:
            raise DivisionByZeroOperand("B")
        if Ap == 0:
            raise DivisionByZeroOperand("A'")
        lhs = Bp / B.conjugate()
        rhs = Cp / Ap.conjugate()
    elif kind == "two_branch":
        a, b, c1, c2 = (_get(amplitudes, k) for k in ("a", "b", "c1", "c2"))
        lhs = complex(abs(c2) ** 2 * abs(b) ** 2)
        rhs = complex(abs(a) ** 2 * abs(c1) ** 2)
    else:
        raise ValueError(f"unknown condition kind {kind!r}")
    residual = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return ConditionCheck(residual <= tol * scale, residual, scale, lhs, rhs)
