"""Schreier coset graphs as lazy labelled graphs.

A group action specification gives, for each coset descriptor and alphabet
symbol, the descriptor of the right-translated coset.  The resulting graph
is fully deterministic (exactly one out-edge per symbol) and the language
of loops at the root coset is the word problem of the pair (group,
subgroup) with respect to the chosen presentation.

Built-in families ship canonical descriptor forms and declared global
constants; arbitrary user actions plug in through ActionSpec with opaque
text descriptors and a pure ``act`` callable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .census import GapReport, WordCensus, count_words, entropy_gap_report
from .chain import CertificateInputs
from .factors import ForbiddenSet
from .graphs import DEFAULT_BUDGET, Declared, Edge, LabelledGraph, Vertex


class ActionError(RuntimeError):
    """The action produced a non-canonical or undefined descriptor."""


@dataclass(frozen=True)
class ActionSpec:
    """Right action of alphabet symbols on canonical coset descriptors."""

    name: str
    alphabet: tuple[str, ...]
    act: Callable[[Vertex, str], Vertex] = field(compare=False)
    root: Vertex = ""
    declared: Declared = field(default_factory=Declared)


def schreier_graph(spec: ActionSpec) -> LabelledGraph:
    """Lazy graph with expand(v) = [(v, a, act(v, a)) for a in the alphabet].

    Out-degree is exactly |alphabet| everywhere; an action failure is a
    hard error, not a missing edge.
    """

    def expand(v):
        edges = []
        for a in spec.alphabet:
            try:
                target = spec.act(v, a)
            except Exception as exc:
                raise ActionError(f"action failed on ({v!r}, {a!r}): {exc}") from exc
            edges.append(Edge(v, a, target))
        return edges

    return LabelledGraph(
        alphabet=spec.alphabet,
        expand=expand,
        roots=[spec.root],
        name=spec.name,
        declared=spec.declared,
    )


def line_z() -> ActionSpec:
    """The integer line: generator r steps +1, its inverse l steps -1.

    Cayley graph of the integers, so denseness measured at the root is
    global; the uniform chain is the simple random walk, rho = 1.
    """
    return ActionSpec(
        name="line_Z",
        alphabet=("l", "r"),
        act=lambda n, a: n + 1 if a == "r" else n - 1,
        root=0,
        declared=Declared(conn_k=1, rho=1.0, homogeneous=True),
    )


def grid_z2() -> ActionSpec:
    """The square grid: u/d move the second coordinate, r/l the first."""
    moves = {"r": (1, 0), "l": (-1, 0), "u": (0, 1), "d": (0, -1)}

    def act(v, a):
        dx, dy = moves[a]
        return (v[0] + dx, v[1] + dy)

    return ActionSpec(
        name="grid_Z2",
        alphabet=("d", "l", "r", "u"),
        act=act,
        root=(0, 0),
        declared=Declared(conn_k=1, rho=1.0, homogeneous=True),
    )


_FREE2_INVERSE = {"a": "A", "A": "a", "b": "B", "B": "b"}


def _free_reduce_append(word: str, sym: str) -> str:
    if word and word[-1] == _FREE2_INVERSE[sym]:
        return word[:-1]
    return word + sym


def free2_mod_cyclic() -> ActionSpec:
    """Cosets of the cyclic subgroup generated by a inside the free group
    on a, b (capital letters are inverses).

    A coset descriptor is the freely reduced word with its maximal leading
    run of a/A letters removed: the root coset reads both a and A as loops.
    Not vertex-transitive, so denseness stays window-scoped.
    """

    def act(d, sym):
        w = _free_reduce_append(d, sym)
        return w.lstrip("aA")

    return ActionSpec(
        name="free2_mod_cyclic",
        alphabet=("A", "B", "a", "b"),
        act=act,
        root="",
        declared=Declared(conn_k=1, homogeneous=False),
    )


_FAMILIES = {
    "line_Z": line_z,
    "grid_Z2": grid_z2,
    "free2_mod_cyclic": free2_mod_cyclic,
}


def builtin_family(name: str) -> ActionSpec:
    try:
        return _FAMILIES[name]()
    except KeyError:
        raise KeyError(
            f"unknown family {name!r}; available: {', '.join(sorted(_FAMILIES))}"
        ) from None


def family_names() -> tuple[str, ...]:
    return tuple(sorted(_FAMILIES))


def word_problem_census(
    spec: ActionSpec,
    N: int,
    forbidden: Optional[ForbiddenSet] = None,
    budget: int = DEFAULT_BUDGET,
) -> WordCensus:
    """Counts of length-n words evaluating into the subgroup, i.e. labels of
    loops at the root coset, optionally avoiding the forbidden factors."""
    g = schreier_graph(spec)
    return count_words(g, spec.root, spec.root, N, forbidden=forbidden, budget=budget)


def growth_sensitivity_report(
    spec: ActionSpec,
    forbidden: ForbiddenSet,
    N: int,
    tail: int = 20,
    cert_inputs: Optional[CertificateInputs] = None,
    budget: int = DEFAULT_BUDGET,
) -> GapReport:
    """Entropy drop of the word problem under the forbidden factors, with a
    certificate assembled from the family's declared constants."""
    g = schreier_graph(spec)
    return entropy_gap_report(
        g,
        spec.root,
        spec.root,
        forbidden,
        N,
        tail=tail,
        cert_inputs=cert_inputs,
        budget=budget,
    )
