"""Decision-tree semantics for black-box predicates.

A predicate of type (Nat -> Bool) -> Bool is probed by applying it to a
free variable bound to a sentinel machine value.  The machine stops when
it tries to apply the sentinel: that application is a query node, its
argument the queried index.  Each query is explored twice by restarting
the stopped configuration with `return true` / `return false`; the
persistent machine makes the restart free.  A run that completes yields
an answer leaf.

Trees are finite maps from addresses (tuples of booleans: the path of
responses from the root) to nodes.  Every node carries the label, the
number of machine transitions on the edge targeting it, and the stopped
machine configuration, so one extraction produces the untimed, timed and
decorated views at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import product
from random import Random
from typing import Optional

from fxlang import machine as mc
from fxlang.errors import StuckError
from fxlang.syntax import (
    App,
    Case,
    Lam,
    Let,
    NameSupply,
    Num,
    Return,
    Signature,
    Term,
    Var,
    bool_,
    complete_handlers,
    is_value,
    language_level,
)

Addr = tuple[bool, ...]


@dataclass(frozen=True, slots=True)
class Query:
    index: int

    def __str__(self) -> str:
        return f"?{self.index}"


@dataclass(frozen=True, slots=True)
class Answer:
    result: bool

    def __str__(self) -> str:
        return f"!{'true' if self.result else 'false'}"


Label = Query | Answer


@dataclass(slots=True)
class TreeNode:
    label: Label
    steps: int = 0
    config: object = None  # (comp, env, kont) snapshot, when decorated


class Classification(enum.Enum):
    N_STANDARD = "n-standard"
    N_PREDICATE = "n-predicate"
    NEITHER = "neither"


def addr_str(addr: Addr) -> str:
    return "".join("t" if b else "f" for b in addr) if addr else "ε"


@dataclass(slots=True)
class DecisionTree:
    """Finite map from addresses to nodes, prefix-closed, answers at the
    leaves.  ``partial`` records addresses whose exploration failed and
    why ('fuel', 'depth', 'unhandled')."""

    nodes: dict[Addr, TreeNode] = field(default_factory=dict)
    partial: dict[Addr, str] = field(default_factory=dict)

    # -- projections

    def labels(self) -> dict[Addr, Label]:
        return {a: n.label for a, n in self.nodes.items()}

    def steps(self) -> dict[Addr, int]:
        return {a: n.steps for a, n in self.nodes.items()}

    def total_steps(self) -> int:
        return sum(n.steps for n in self.nodes.values())

    def is_partial(self) -> bool:
        return bool(self.partial)

    def addresses(self) -> list[Addr]:
        return sorted(self.nodes, key=lambda a: (len(a), a))

    # -- classification (structure of the label map alone)

    def classify(self, n: int) -> Classification:
        kind, _ = self.classify_detail(n)
        return kind

    def classify_detail(self, n: int) -> tuple[Classification, Optional[str]]:
        if not self.nodes or self.partial:
            return Classification.NEITHER, "tree is empty or partial"
        for addr, node in self.nodes.items():
            if node.label.__class__ is Query:
                if node.label.index >= n:
                    return (
                        Classification.NEITHER,
                        f"query {node.label.index} out of range at {addr_str(addr)}",
                    )
                for b in (True, False):
                    if addr + (b,) not in self.nodes:
                        return (
                            Classification.NEITHER,
                            f"missing child under {addr_str(addr)}",
                        )
            else:
                for b in (True, False):
                    if addr + (b,) in self.nodes:
                        return (
                            Classification.NEITHER,
                            f"answer at {addr_str(addr)} is not a leaf",
                        )
        # An n-predicate tree.  n-standard additionally means full depth n
        # with no repeated queries on any path.
        reason = self._standard_defect(n)
        if reason is None:
            return Classification.N_STANDARD, None
        return Classification.N_PREDICATE, reason

    def _standard_defect(self, n: int) -> Optional[str]:
        stack: list[tuple[Addr, frozenset]] = [((), frozenset())]
        while stack:
            addr, seen = stack.pop()
            node = self.nodes.get(addr)
            if node is None:
                return f"address {addr_str(addr)} missing"
            if node.label.__class__ is Query:
                k = node.label.index
                if k in seen:
                    return f"repeated query {k}"
                if len(addr) >= n:
                    return f"query below depth {n}"
                s2 = seen | {k}
                stack.append((addr + (True,), s2))
                stack.append((addr + (False,), s2))
            elif len(addr) != n:
                return f"answer at depth {len(addr)}, not {n}"
        if len(self.nodes) != 2 ** (n + 1) - 1:
            return f"domain has {len(self.nodes)} nodes, not {2 ** (n + 1) - 1}"
        return None

    # -- semantics

    def eval_point(self, point) -> bool:
        """The answer this tree gives on a semantic point (indexable by
        query index)."""

        addr: Addr = ()
        while True:
            node = self.nodes.get(addr)
            if node is None:
                raise KeyError(f"path fell off the tree at {addr_str(addr)}")
            if node.label.__class__ is Answer:
                return node.label.result
            addr = addr + (bool(point[node.label.index]),)

    def count_true(self, n: int) -> int:
        """Number of true leaves; equals the point count on n-standard
        trees."""

        kind = self.classify(n)
        if kind is not Classification.N_STANDARD:
            raise ValueError(f"count_true needs an n-standard tree, got {kind.value}")
        return sum(
            1
            for node in self.nodes.values()
            if node.label.__class__ is Answer and node.label.result
        )

    def brute_force_count(self, n: int) -> int:
        """Count satisfying points by walking the tree on all 2^n points:
        the independent oracle for any n-predicate tree."""

        return sum(1 for pt in product((False, True), repeat=n) if self.eval_point(pt))

    def flip_leaf(self, addr: Addr) -> "DecisionTree":
        node = self.nodes.get(addr)
        if node is None or node.label.__class__ is not Answer:
            raise ValueError(f"{addr_str(addr)} is not an answer leaf")
        nodes = dict(self.nodes)
        nodes[addr] = TreeNode(Answer(not node.label.result), node.steps, node.config)
        return DecisionTree(nodes, dict(self.partial))

    def leaves(self) -> list[Addr]:
        return [a for a in self.addresses() if self.nodes[a].label.__class__ is Answer]

    # -- rendering

    def to_text(self, timed: bool = True) -> str:
        lines = []
        for addr in self.addresses():
            node = self.nodes[addr]
            if timed:
                lines.append(f"{addr_str(addr)} {node.label} {node.steps}")
            else:
                lines.append(f"{addr_str(addr)} {node.label}")
        for addr in sorted(self.partial, key=lambda a: (len(a), a)):
            lines.append(f"{addr_str(addr)} unexplored:{self.partial[addr]}")
        return "\n".join(lines)

    def to_dot(self, timed: bool = False) -> str:
        out = ["digraph tree {"]
        for addr in self.addresses():
            node = self.nodes[addr]
            name = addr_str(addr)
            shape = "circle" if node.label.__class__ is Query else "box"
            out.append(f'  "{name}" [label="{node.label}", shape={shape}];')
            if addr:
                parent = addr_str(addr[:-1])
                lbl = "t" if addr[-1] else "f"
                if timed:
                    lbl += f" ({node.steps})"
                out.append(f'  "{parent}" -> "{name}" [label="{lbl}"];')
        out.append("}")
        return "\n".join(out)

    def __eq__(self, other):
        return isinstance(other, DecisionTree) and self.labels() == other.labels()


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------


def extract_tree(
    pred: Term,
    sig: Signature | None = None,
    fuel: int = 1_000_000,
    depth_bound: Optional[int] = None,
    probe_name: str = "q",
) -> DecisionTree:
    """Run the probe on a predicate and materialise its decision tree.

    ``fuel`` bounds the transitions of each edge segment; a branch that
    exhausts it is recorded as unexplored (the tree is partial there),
    matching the reading of divergence as undefinedness.  ``depth_bound``
    caps the address length explored.

    Stateful predicates are rejected: with reference cells there is no
    canonical tree to assign.
    """

    if "state" in language_level(pred):
        raise ValueError("no decision tree for stateful predicates")
    if sig:
        pred = complete_handlers(pred, sig)
    if pred.__class__ is Return and is_value(pred.value):
        pred = pred.value
    probe = mc.VSentinel(probe_name)
    root = App(pred, Var(probe_name)) if is_value(pred) else pred
    st0 = mc.MachineState(root, {probe_name: probe}, mc.identity_cont())
    tree = DecisionTree()
    stack: list[tuple[Addr, mc.MachineState]] = [((), st0)]
    while stack:
        addr, st = stack.pop()
        kind = mc.drive(st, fuel, probe=probe)
        if kind == "query":
            k = st.out_query
            if k.__class__ is not int:
                raise StuckError(f"query index is not a numeral: {k!r}")
            if depth_bound is not None and len(addr) >= depth_bound:
                tree.nodes[addr] = TreeNode(Query(k), st.ticks, _snapshot(st))
                tree.partial[addr + (True,)] = "depth"
                tree.partial[addr + (False,)] = "depth"
                continue
            tree.nodes[addr] = TreeNode(Query(k), st.ticks, _snapshot(st))
            for b in (True, False):
                stack.append((addr + (b,), st.fork(Return(bool_(b)))))
        elif kind == "answer":
            tree.nodes[addr] = TreeNode(
                Answer(mc.mval_to_bool(st.out_value)), st.ticks, _snapshot(st)
            )
        elif kind == "op":
            tree.partial[addr] = "unhandled"
        else:  # fuel
            tree.partial[addr] = "fuel"
    return tree


def _snapshot(st: mc.MachineState):
    return (st.comp, st.env, st.kont)


# ---------------------------------------------------------------------------
# Compilation back to a predicate
# ---------------------------------------------------------------------------


def tree_to_predicate(tree: DecisionTree) -> Term:
    """A pure predicate term whose extracted untimed tree is exactly the
    input: the tree structure mirrored by nested conditionals."""

    if tree.partial:
        raise ValueError("cannot compile a partial tree")
    ns = NameSupply()
    qv = ns.fresh("q")

    def emit(addr: Addr) -> Term:
        node = tree.nodes.get(addr)
        if node is None:
            raise ValueError(f"missing node at {addr_str(addr)}")
        if node.label.__class__ is Answer:
            return Return(bool_(node.label.result))
        b = ns.fresh("b")
        return Let(
            b,
            App(Var(qv), Num(node.label.index)),
            Case(
                Var(b),
                ns.fresh("_"),
                emit(addr + (True,)),
                ns.fresh("_"),
                emit(addr + (False,)),
            ),
        )

    from fxlang.syntax import Arrow, BOOL, NAT

    return Lam(qv, emit(()), Arrow(NAT, BOOL))


# ---------------------------------------------------------------------------
# Random trees (test corpora)
# ---------------------------------------------------------------------------


def random_standard_tree(rng: Random, n: int) -> DecisionTree:
    """A uniformly shaped n-standard tree: fresh query order per path,
    random answers."""

    tree = DecisionTree()

    def go(addr: Addr, remaining: tuple[int, ...]):
        if len(addr) == n:
            tree.nodes[addr] = TreeNode(Answer(rng.random() < 0.5))
            return
        k = remaining[rng.randrange(len(remaining))]
        rest = tuple(i for i in remaining if i != k)
        tree.nodes[addr] = TreeNode(Query(k))
        go(addr + (True,), rest)
        go(addr + (False,), rest)

    go((), tuple(range(n)))
    return tree


def random_predicate_tree(
    rng: Random,
    n: int,
    p_answer: float = 0.25,
    allow_repeats: bool = True,
    max_depth: Optional[int] = None,
) -> DecisionTree:
    """A random total n-predicate tree, possibly with repeated and
    missing queries (the general class)."""

    cap = max_depth if max_depth is not None else n + 2
    tree = DecisionTree()

    def go(addr: Addr, seen: frozenset):
        deep = len(addr) >= cap
        if deep or rng.random() < p_answer:
            tree.nodes[addr] = TreeNode(Answer(rng.random() < 0.5))
            return
        if allow_repeats:
            k = rng.randrange(n)
        else:
            avail = [i for i in range(n) if i not in seen]
            if not avail:
                tree.nodes[addr] = TreeNode(Answer(rng.random() < 0.5))
                return
            k = avail[rng.randrange(len(avail))]
        tree.nodes[addr] = TreeNode(Query(k))
        go(addr + (True,), seen | {k})
        go(addr + (False,), seen | {k})

    go((), frozenset())
    return tree
