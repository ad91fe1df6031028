"""Tree decompositions and the exact bounded-width Max-SAT DP.

``tree_decompose`` runs min-fill elimination (no optimality promise, widths
stay small on layer-bounded parts), ``rebalance`` rebuilds any valid
decomposition into a rooted binary one of logarithmic depth with bag size at
most tripled, and ``bdtw_maxsat`` recursively enumerates bag-variable
extensions to compute an exact optimum with a witnessing assignment.  The
PTAS driver stitches these together over the band partition.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any

from satmeter.formula import (
    Assignment,
    Formula,
    IncidenceGraph,
    Vertex,
    eval_assignment,
    incidence_graph,
)
from satmeter.metering import meter_scope, note_pass, tracked
from satmeter.planar import partition, verify_partition
from satmeter.twosat import SolveResult


@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted bag tree over incidence-graph vertices."""

    bags: tuple[frozenset[Vertex], ...]  # indexed by node id
    children: tuple[tuple[int, ...], ...]
    root: int

    @property
    def num_nodes(self) -> int:
        return len(self.bags)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1

    @property
    def depth(self) -> int:
        depth = {self.root: 0}
        best = 0
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                depth[c] = depth[v] + 1
                best = max(best, depth[c])
                stack.append(c)
        return best

    @property
    def binary(self) -> bool:
        return all(len(c) <= 2 for c in self.children)

    def node_depths(self) -> dict[int, int]:
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                depth[c] = depth[v] + 1
                stack.append(c)
        return depth


def _components(vertices: set[Vertex], adj: dict[Vertex, set[Vertex]]) -> list[set[Vertex]]:
    comps = []
    seen: set[Vertex] = set()
    for start in sorted(vertices):
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w in vertices and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def _min_fill_order(vertices: set[Vertex], adj: dict[Vertex, set[Vertex]]):
    """Min-fill elimination; yields (vertex, bag) pairs, deterministic ties."""
    work = {v: set(adj[v]) & vertices for v in vertices}
    remaining = set(vertices)
    while remaining:
        best_v = None
        best_fill = None
        for v in sorted(remaining):
            nbrs = work[v]
            fill = 0
            nl = sorted(nbrs)
            for i in range(len(nl)):
                for j in range(i + 1, len(nl)):
                    if nl[j] not in work[nl[i]]:
                        fill += 1
            if best_fill is None or fill < best_fill:
                best_fill, best_v = fill, v
                if fill == 0:
                    break
        nbrs = sorted(work[best_v])
        yield best_v, frozenset([best_v, *nbrs])
        for i in range(len(nbrs)):
            for j in range(i + 1, len(nbrs)):
                work[nbrs[i]].add(nbrs[j])
                work[nbrs[j]].add(nbrs[i])
        for w in nbrs:
            work[w].discard(best_v)
        del work[best_v]
        remaining.discard(best_v)


def tree_decompose(graph: IncidenceGraph) -> TreeDecomposition:
    """Valid (heuristic-width) decomposition via min-fill elimination.

    Disconnected graphs get per-component decompositions joined under an
    empty root bag.
    """
    vertices = graph.vertices()
    adj = {v: set(graph.neighbors(v)) for v in vertices}
    if not vertices:
        return TreeDecomposition(bags=(frozenset(),), children=((),), root=0)

    comp_tds: list[tuple[list[frozenset[Vertex]], list[list[int]], int]] = []
    for comp in _components(vertices, adj):
        order = list(_min_fill_order(comp, adj))
        bags = [bag for _, bag in order]
        elim_pos = {v: i for i, (v, _) in enumerate(order)}
        children: list[list[int]] = [[] for _ in bags]
        for i, (v, bag) in enumerate(order):
            later = [elim_pos[w] for w in bag if w != v and elim_pos[w] > i]
            if later:
                children[min(later)].append(i)
        comp_tds.append((bags, children, len(bags) - 1))

    if len(comp_tds) == 1:
        bags, children, root = comp_tds[0]
        return TreeDecomposition(
            bags=tuple(bags),
            children=tuple(tuple(c) for c in children),
            root=root,
        )

    # join components under a shared empty root bag
    all_bags: list[frozenset[Vertex]] = [frozenset()]
    all_children: list[list[int]] = [[]]
    for bags, children, root in comp_tds:
        offset = len(all_bags)
        all_bags.extend(bags)
        all_children.extend([c + offset for c in cs] for cs in children)
        all_children[0].append(root + offset)
    return TreeDecomposition(
        bags=tuple(all_bags),
        children=tuple(tuple(c) for c in all_children),
        root=0,
    )


def validate_td(
    graph: IncidenceGraph, td: TreeDecomposition
) -> tuple[bool, str | None]:
    """Check the three decomposition axioms; returns (ok, witness)."""
    covered: set[Vertex] = set()
    occurrences: dict[Vertex, list[int]] = {}
    for node, bag in enumerate(td.bags):
        covered |= bag
        for v in bag:
            occurrences.setdefault(v, []).append(node)
    missing = graph.vertices() - covered
    if missing:
        return False, f"vertex {sorted(missing)[0]} in no bag"
    for edge in sorted(graph.edges(), key=sorted):
        u, v = sorted(edge)
        if not any(u in bag and v in bag for bag in td.bags):
            return False, f"edge {u}-{v} in no bag"
    # connected occurrence subtrees: count tree edges inside each vertex's
    # occurrence set; a connected subtree on s nodes has s-1 of them
    parent: dict[int, int] = {}
    stack = [td.root]
    while stack:
        x = stack.pop()
        for c in td.children[x]:
            parent[c] = x
            stack.append(c)
    for v, nodes in occurrences.items():
        node_set = set(nodes)
        internal = sum(
            1 for x in nodes if x != td.root and parent[x] in node_set
        )
        if internal != len(nodes) - 1:
            return False, f"occurrence set of {v} is disconnected"
    return True, None


def _tree_adjacency(td: TreeDecomposition) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {i: set() for i in range(td.num_nodes)}
    for v, cs in enumerate(td.children):
        for c in cs:
            adj[v].add(c)
            adj[c].add(v)
    return adj


def _component_nodes(nodes: set[int], adj: dict[int, set[int]], start: int) -> set[int]:
    comp = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w in nodes and w not in comp:
                comp.add(w)
                queue.append(w)
    return comp


def _tree_path(adj: dict[int, set[int]], nodes: set[int], a: int, b: int) -> list[int]:
    prev = {a: a}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        if v == b:
            break
        for w in sorted(adj[v]):
            if w in nodes and w not in prev:
                prev[w] = v
                queue.append(w)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def rebalance(td: TreeDecomposition) -> TreeDecomposition:
    """Binary, log-depth rebuild; bag sizes grow at most threefold.

    Recursive separator scheme: remove a splitter node s (a centroid, or a
    node on the path between the current piece's two boundary attachment
    points), root the piece at the union of B_s with the boundary bags, and
    recurse into the remaining components.  Every piece carries at most two
    boundary nodes, so bags union at most three original bags.
    """
    adj = _tree_adjacency(td)
    out_bags: list[frozenset[Vertex]] = []
    out_children: list[list[int]] = []

    def emit(bag: frozenset[Vertex]) -> int:
        out_bags.append(bag)
        out_children.append([])
        return len(out_bags) - 1

    def build(nodes: set[int], boundary: tuple[int, ...]) -> int:
        boundary = tuple(dict.fromkeys(boundary))  # dedupe, keep order
        bbag = frozenset().union(*(td.bags[b] for b in boundary)) if boundary else frozenset()
        if len(nodes) == 1:
            (only,) = nodes
            return emit(td.bags[only] | bbag)
        if len(boundary) == 2:
            candidates = _tree_path(adj, nodes, boundary[0], boundary[1])
        else:
            candidates = sorted(nodes)
        best_s = None
        best_worst = None
        for s in candidates:
            rest = nodes - {s}
            worst = 0
            unseen = set(rest)
            while unseen:
                comp = _component_nodes(rest, adj, min(unseen))
                unseen -= comp
                worst = max(worst, len(comp))
            if best_worst is None or worst < best_worst:
                best_worst, best_s = worst, s
        s = best_s
        root = emit(td.bags[s] | bbag)
        rest = nodes - {s}
        subtree_roots: list[int] = []
        unseen = set(rest)
        while unseen:
            comp = _component_nodes(rest, adj, min(unseen))
            unseen -= comp
            sub_boundary = tuple(
                sorted({b for b in boundary if b in comp}
                       | {w for w in adj[s] if w in comp})
            )
            assert len(sub_boundary) <= 2, "separator invariant broken"
            subtree_roots.append(build(comp, sub_boundary))
        # attach children, binarizing with copies of the root bag
        attach = root
        while len(subtree_roots) > 2:
            spare = emit(out_bags[root])
            left = subtree_roots.pop()
            out_children[attach].extend([left, spare])
            attach = spare
        out_children[attach].extend(subtree_roots)
        return root

    root = build(set(range(td.num_nodes)), ())
    return TreeDecomposition(
        bags=tuple(out_bags),
        children=tuple(tuple(c) for c in out_children),
        root=root,
    )


def _clause_owners(td: TreeDecomposition) -> dict[int, list[int]]:
    """node -> clause indices owned there (shallowest bag containing them)."""
    depths = td.node_depths()
    shallowest: dict[int, int] = {}
    for node, bag in enumerate(td.bags):
        for v in bag:
            if v[0] != "C":
                continue
            j = v[1]
            if j not in shallowest or depths[node] < depths[shallowest[j]]:
                shallowest[j] = node
    owners: dict[int, list[int]] = {}
    for j, node in shallowest.items():
        owners.setdefault(node, []).append(j)
    for lst in owners.values():
        lst.sort()
    return owners


def bdtw_maxsat(
    td: TreeDecomposition, formula: Formula
) -> tuple[int, Assignment]:
    """Exact maximum satisfied-clause count plus witnessing assignment.

    Recursive DP over the rooted bag tree: each frame enumerates extensions
    of the inherited partial assignment over its bag's variables (plus the
    variables of the clauses it owns), scores the clauses owned at the node,
    and adds the children's optima.  Each clause is owned by the unique
    shallowest bag containing its vertex, so sibling values add without
    double counting.  Ties go to the lexicographically smallest extension.
    """
    graph = incidence_graph(formula)
    ok, witness = validate_td(graph, td)
    if not ok:
        raise ValueError(f"invalid tree decomposition: {witness}")
    owners = _clause_owners(td)

    frame_vars: list[tuple[int, ...]] = []
    for node, bag in enumerate(td.bags):
        varset = {v[1] for v in bag if v[0] == "x"}
        for j in owners.get(node, ()):
            varset.update(abs(lit) for lit in formula.clauses[j - 1])
        frame_vars.append(tuple(sorted(varset)))

    def solve(node: int, psi: dict[int, int]) -> tuple[int, dict[int, int]]:
        new_vars = tuple(v for v in frame_vars[node] if v not in psi)
        owned = owners.get(node, ())
        with tracked(len(new_vars) + len(frame_vars[node]) + 3):
            note_pass("decomposition")
            best_val = -1
            best_ext: dict[int, int] = {}
            for bits in product((0, 1), repeat=len(new_vars)):
                ext = dict(zip(new_vars, bits))
                local = psi | ext
                val = 0
                for j in owned:
                    for lit in formula.clauses[j - 1]:
                        v = local[abs(lit)]
                        if (v == 1) == (lit > 0):
                            val += 1
                            break
                child_ext: dict[int, int] = {}
                for child in td.children[node]:
                    cval, cext = solve(child, local)
                    val += cval
                    child_ext |= cext
                if val > best_val:
                    best_val = val
                    best_ext = ext | child_ext
            return best_val, best_ext

    with meter_scope("bdtw"):
        val, ext = solve(td.root, {})
    phi = {i: ext.get(i, 0) for i in range(1, formula.n + 1)}
    return val, phi


def _renumbered(part: Formula) -> tuple[Formula, dict[int, int]]:
    """Compact the variable space of a part; returns (formula, new->old)."""
    used = sorted(part.variables())
    old_to_new = {old: new for new, old in enumerate(used, start=1)}
    clauses = tuple(
        tuple(
            old_to_new[abs(lit)] * (1 if lit > 0 else -1) for lit in clause
        )
        for clause in part.clauses
    )
    compact = Formula(n=len(used), clauses=clauses)
    return compact, {new: old for old, new in old_to_new.items()}


def solve_part_exact(part: Formula) -> tuple[int, Assignment, dict[str, Any]]:
    """Exact solve of one partition part via decompose + rebalance + DP."""
    compact, new_to_old = _renumbered(part)
    g = incidence_graph(compact)
    td = rebalance(tree_decompose(g))
    val, phi = bdtw_maxsat(td, compact)
    mapped = {new_to_old[v]: bit for v, bit in phi.items()}
    info = {
        "width": td.width,
        "depth": td.depth,
        "dp_nodes": td.num_nodes,
        "clauses": part.m,
    }
    return val, mapped, info


def planar_ptas(
    formula: Formula, eps: Fraction | float | str
) -> SolveResult:
    """(1 - eps)-approximate assignment for planar-incidence instances.

    Uses band modulus k = ceil(2/eps) (the partition loses up to 2m/k
    clauses), solves each part exactly and merges the variable-disjoint part
    assignments; variables in no part default to 0.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    k = math.ceil(Fraction(2) / eps)
    with meter_scope("planar_ptas") as sc:
        result = partition(formula, k)
        report = verify_partition(formula, result, k)
        merged: Assignment = {}
        part_infos = []
        for part in result.stream():
            val, phi, info = solve_part_exact(part)
            merged |= phi
            part_infos.append(info)
        for i in range(1, formula.n + 1):
            merged.setdefault(i, 0)
        count = eval_assignment(formula, merged)
    return SolveResult(
        assignment=merged,
        count=count,
        details={
            "eps": str(eps),
            "k": k,
            "parts": len(result.parts),
            "retained_clauses": result.retained,
            "band_residue": result.band.chosen_i,
            "clause_loss": result.band.clause_loss,
            "partition_ok": report.ok,
            "part_infos": part_infos,
        },
        report=sc.report,
    )
