"""Forbidden-factor machinery.

Builds the matching automaton for a finite set F of forbidden words
(prefix trie plus failure links, with factor detection closed under the
failure chain), forms the product graph whose paths are exactly the
F-avoiding paths of a base graph, and searches for relative-denseness
certificates: from every vertex, within forward distance D, some word of F
can be read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graphs import (
    DEFAULT_BUDGET,
    Edge,
    LabelledGraph,
    Vertex,
    Window,
    forward_ball,
    vertex_key,
)

Word = tuple[str, ...]


class ForbiddenWordError(ValueError):
    """A forbidden word is empty or uses a symbol outside the alphabet."""


@dataclass(frozen=True)
class ForbiddenSet:
    """Finite nonempty set of nonempty words over the graph alphabet."""

    words: tuple[Word, ...]

    def __post_init__(self):
        if not self.words:
            raise ForbiddenWordError("forbidden set must be nonempty")
        for w in self.words:
            if len(w) == 0:
                raise ForbiddenWordError("the empty word cannot be forbidden")

    @property
    def max_length(self) -> int:
        return max(len(w) for w in self.words)

    @classmethod
    def from_strings(cls, words: Iterable[str], alphabet: Iterable[str]) -> "ForbiddenSet":
        """Parse text words into label sequences.

        If every alphabet symbol is a single character, a word like "aa"
        splits per character; otherwise symbols must be comma-separated
        ("up,up").  Unknown symbols raise ForbiddenWordError.
        """
        alpha = tuple(alphabet)
        alpha_set = set(alpha)
        single = all(len(a) == 1 for a in alpha)
        parsed = []
        for text in words:
            if "," in text:
                parts = tuple(p for p in text.split(",") if p)
            elif text in alpha_set:
                parts = (text,)
            elif single:
                parts = tuple(text)
            else:
                raise ForbiddenWordError(
                    f"cannot split word {text!r} over multi-character alphabet; use commas"
                )
            for sym in parts:
                if sym not in alpha_set:
                    raise ForbiddenWordError(f"symbol {sym!r} not in alphabet {alpha}")
            parsed.append(parts)
        return cls(words=tuple(dict.fromkeys(parsed)))

    def as_strings(self) -> tuple[str, ...]:
        return tuple(
            "".join(w) if all(len(s) == 1 for s in w) else ",".join(w) for w in self.words
        )


class FactorAutomaton:
    """Deterministic automaton detecting occurrences of the words of F.

    States are prefix-trie nodes (ints, 0 = empty prefix); ``step`` follows
    the goto table completed through failure links, so after reading any
    word u the current state is the longest trie prefix that is a suffix
    of u.  A state is dead iff its failure chain meets a full word of F,
    i.e. the automaton is in a dead state at position i exactly when some
    forbidden word ends at position i.  Dead states are absorbing.
    """

    def __init__(self, forbidden: ForbiddenSet, alphabet: Iterable[str]):
        self.alphabet = tuple(alphabet)
        alpha_set = set(self.alphabet)
        for w in forbidden.words:
            for sym in w:
                if sym not in alpha_set:
                    raise ForbiddenWordError(
                        f"forbidden word {w} uses symbol {sym!r} outside the alphabet"
                    )
        self.forbidden = forbidden
        self.start = 0
        goto: list[dict[str, int]] = [{}]
        terminal: list[bool] = [False]
        for w in forbidden.words:
            s = 0
            for sym in w:
                if sym not in goto[s]:
                    goto.append({})
                    terminal.append(False)
                    goto[s][sym] = len(goto) - 1
                s = goto[s][sym]
            terminal[s] = True
        # failure links by BFS over trie depth
        fail = [0] * len(goto)
        queue = list(goto[0].values())
        for s in queue:
            fail[s] = 0
        while queue:
            s = queue.pop(0)
            for sym, t in goto[s].items():
                f = fail[s]
                while f and sym not in goto[f]:
                    f = fail[f]
                fail[t] = goto[f][sym] if sym in goto[f] and goto[f][sym] != t else 0
                terminal[t] = terminal[t] or terminal[fail[t]]
                queue.append(t)
        # full transition table over the alphabet, dead states absorbing
        dead = frozenset(s for s, t in enumerate(terminal) if t)
        table: list[dict[str, int]] = []
        for s in range(len(goto)):
            row = {}
            for sym in self.alphabet:
                if s in dead:
                    row[sym] = s
                    continue
                t = s
                while t and sym not in goto[t]:
                    t = fail[t]
                row[sym] = goto[t].get(sym, 0)
            table.append(row)
        self._table = table
        self.dead = dead
        self.states = tuple(range(len(goto)))

    def step(self, state: int, symbol: str) -> int:
        return self._table[state][symbol]

    def is_dead(self, state: int) -> bool:
        return state in self.dead

    def run(self, word: Iterable[str]) -> int:
        """State after reading the word; stays in a dead state once entered."""
        s = self.start
        for sym in word:
            s = self.step(s, sym)
        return s

    def rejects(self, word: Iterable[str]) -> bool:
        """True iff some forbidden word occurs as a factor of the word."""
        s = self.start
        for sym in word:
            s = self.step(s, sym)
            if s in self.dead:
                return True
        return False


def build_factor_automaton(forbidden: ForbiddenSet, alphabet: Iterable[str]) -> FactorAutomaton:
    return FactorAutomaton(forbidden, alphabet)


def product_graph(
    g: LabelledGraph,
    automaton: FactorAutomaton,
    roots: Optional[Iterable[Vertex]] = None,
) -> LabelledGraph:
    """Lazy graph over pair vertices (v, state) whose paths from (x, start)
    are exactly the F-avoiding paths from x in the base graph.

    Edges stepping into a dead automaton state are pruned, so path counting
    on the product directly counts F-avoiding paths.  ``roots`` defaults to
    the base roots paired with the start state.
    """
    if set(automaton.alphabet) != set(g.alphabet):
        raise ForbiddenWordError("graph and factor automaton use different alphabets")
    if roots is None:
        roots = g.roots
    start = automaton.start

    def expand(pair):
        v, s = pair
        out = []
        for e in g.out_edges(v):
            s2 = automaton.step(s, e.label)
            if s2 not in automaton.dead:
                out.append(Edge(pair, e.label, (e.target, s2)))
        return out

    return LabelledGraph(
        alphabet=g.alphabet,
        expand=expand,
        roots=[(r, start) for r in roots],
        name=f"{g.name}/avoiding" if g.name else "product",
        declared=g.declared,
    )


def base_edge(e: Edge) -> Edge:
    """The base-graph edge underlying a product-graph edge."""
    (v, _), (t, _) = e.source, e.target
    return Edge(v, e.label, t)


@dataclass(frozen=True)
class DensenessWitness:
    vertex: Vertex
    via: Vertex            # y with d+(vertex, y) <= D
    word: Word             # the forbidden word readable from y
    approach: tuple[Edge, ...]   # path vertex -> y
    reading: tuple[Edge, ...]    # path from y labelled word


@dataclass(frozen=True)
class DensenessCertificate:
    """Witness map proving F relatively dense on a window, with constant D."""

    D: int
    witnesses: dict = field(compare=False)  # vertex -> DensenessWitness

    def max_distance(self) -> int:
        return max((len(w.approach) for w in self.witnesses.values()), default=0)


def _read_word(g: LabelledGraph, start: Vertex, word: Word) -> Optional[tuple[Edge, ...]]:
    """Some path from start labelled exactly ``word``, or None.

    The graph need not be deterministic; a depth-first search over label
    matches is used.
    """
    stack = [(start, 0, ())]
    while stack:
        v, i, path = stack.pop()
        if i == len(word):
            return path
        for e in g.out_edges(v):
            if e.label == word[i]:
                stack.append((e.target, i + 1, path + (e,)))
    return None


def certify_denseness(
    g: LabelledGraph,
    forbidden: ForbiddenSet,
    D: int,
    w: Window,
    budget: int = DEFAULT_BUDGET,
):
    """Search, for every window vertex x, a vertex y within forward distance
    D from which some forbidden word labels a path.

    Returns a DensenessCertificate covering every window vertex, or the
    sorted list of uncovered vertices.  The per-vertex searches may expand
    the graph beyond the window.
    """
    if D < 0:
        raise ValueError("D must be >= 0")
    witnesses = {}
    uncovered = []
    for x in w.sorted_vertices():
        ball = forward_ball(g, x, D, budget=budget)
        found = None
        for y in ball.sorted_vertices():
            for word in forbidden.words:
                reading = _read_word(g, y, word)
                if reading is not None:
                    approach = _approach_path(g, x, y, D, budget)
                    found = DensenessWitness(
                        vertex=x, via=y, word=word, approach=approach, reading=reading
                    )
                    break
            if found:
                break
        if found:
            witnesses[x] = found
        else:
            uncovered.append(x)
    if uncovered:
        return uncovered
    return DensenessCertificate(D=D, witnesses=witnesses)


def _approach_path(g, x, y, cap, budget):
    from .graphs import _shortest_path

    path = _shortest_path(g, x, y, cap, budget)
    assert path is not None  # y came from the radius-cap ball around x
    return path


def estimate_denseness_constant(
    g: LabelledGraph,
    forbidden: ForbiddenSet,
    w: Window,
    D_max: int,
    budget: int = DEFAULT_BUDGET,
) -> Optional[DensenessCertificate]:
    """Smallest D <= D_max admitting a denseness certificate on the window,
    or None.  Monotone: success at D implies success at D+1."""
    if D_max < 0:
        raise ValueError("D_max must be >= 0")
    for D in range(D_max + 1):
        result = certify_denseness(g, forbidden, D, w, budget=budget)
        if isinstance(result, DensenessCertificate):
            return result
    return None
