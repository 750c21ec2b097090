"""Markov chains on edge-labelled graphs, with forbidden transition words.

Each edge carries a probability p(e) >= alpha > 0 with row sums at most 1
(a particle may die).  Restricted n-step vectors forbid traversing any
label sequence of F, realized by running the same weights on the product
graph.  The certified entropy-gap bound composes two facts:

  * every k = D + R steps, an F-avoiding walk misses at least one readable
    forbidden word, so the k-step restricted row sums are <= 1 - alpha^k;
  * a rho-harmonic reweighting (h-transform) turns the general case into
    the stochastic one at the price of lowering the edge floor to
    alpha_bar = (alpha/rho)^(conn_k + 1).

Together: rho_F <= rho * (1 - alpha_bar^k)^(1/k) < rho, strictly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import linalg
from .factors import (
    ForbiddenSet,
    base_edge,
    build_factor_automaton,
    certify_denseness,
    DensenessCertificate,
    estimate_denseness_constant,
    product_graph,
)
from .graphs import (
    DEFAULT_BUDGET,
    Edge,
    ExpansionBudgetExceeded,
    LabelledGraph,
    Vertex,
    Window,
    check_fully_deterministic,
    forward_ball,
    full_window,
    uniform_connectedness_constant,
    vertex_key,
)
from .growth import fit_log_growth

NEG_INF = float("-inf")


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedChain:
    """Edge probabilities p(e) >= alpha with substochastic rows."""

    graph: LabelledGraph
    weight: Callable[[Edge], object] = field(compare=False)
    alpha: object = 0.0            # Fraction or float lower bound
    exact: bool = False            # weights are Fractions

    @property
    def sigma_size(self) -> int:
        return len(self.graph.alphabet)


def uniform_weights(g: LabelledGraph, exact: bool = True) -> WeightedChain:
    """Every edge gets probability 1/|alphabet|.

    On deterministic graphs the rows sum to out-degree/|alphabet| <= 1; an
    out-degree above |alphabet| shows up as a row-sum violation (checked
    eagerly on finite graphs, by ``validate`` on windows otherwise).
    """
    sigma = len(g.alphabet)
    p = Fraction(1, sigma) if exact else 1.0 / sigma
    chain = WeightedChain(graph=g, weight=lambda e: p, alpha=p, exact=exact)
    if g.is_finite:
        for v in g.vertex_list:
            if len(g.out_edges(v)) > sigma:
                raise ChainError(
                    f"vertex {vertex_key(v)} has out-degree {len(g.out_edges(v))} > |alphabet|"
                )
    return chain


def validate(chain: WeightedChain, w: Window) -> list[str]:
    """Row-sum and edge-floor violations on the window (empty list = Ok)."""
    tol = 0 if chain.exact else 1e-12
    problems = []
    for v in w.sorted_vertices():
        total = sum(chain.weight(e) for e in chain.graph.out_edges(v))
        if total > 1 + tol:
            problems.append(f"row sum {float(total):.12g} > 1 at {vertex_key(v)}")
        for e in chain.graph.out_edges(v):
            if chain.weight(e) < chain.alpha - tol:
                problems.append(
                    f"edge weight {float(chain.weight(e)):.12g} below alpha at "
                    f"{vertex_key(v)} -{e.label}->"
                )
    return problems


@dataclass
class StepDistribution:
    """Mass of the particle after n steps from x.

    Unrestricted distributions live on base vertices; restricted ones live
    on product states (vertex, automaton state) and collapse through
    ``by_vertex``.  Total mass <= 1, the deficit is the death probability.
    """

    x: Vertex
    n: int
    mass: dict
    forbidden: Optional[ForbiddenSet] = None
    graph: LabelledGraph = None  # graph the DP steps on (base or product)

    def by_vertex(self) -> dict:
        if self.forbidden is None:
            return dict(self.mass)
        out: dict = {}
        for (v, _s), p in self.mass.items():
            out[v] = out.get(v, 0) + p
        return out

    def total(self):
        return sum(self.mass.values())


def initial_distribution(
    chain: WeightedChain, x: Vertex, forbidden: Optional[ForbiddenSet] = None
) -> StepDistribution:
    one = Fraction(1) if chain.exact else 1.0
    if forbidden is None:
        return StepDistribution(x=x, n=0, mass={x: one}, graph=chain.graph)
    automaton = build_factor_automaton(forbidden, chain.graph.alphabet)
    pg = product_graph(chain.graph, automaton, roots=[x])
    return StepDistribution(
        x=x, n=0, mass={(x, automaton.start): one}, forbidden=forbidden, graph=pg
    )


def step(
    chain: WeightedChain, dist: StepDistribution, budget: int = DEFAULT_BUDGET
) -> StepDistribution:
    """One transition-matrix multiplication over lazily expanded edges."""
    restricted = dist.forbidden is not None
    nxt: dict = {}
    for state, p in dist.mass.items():
        for e in dist.graph.out_edges(state):
            w = chain.weight(base_edge(e)) if restricted else chain.weight(e)
            nxt[e.target] = nxt.get(e.target, 0) + p * w
            if len(nxt) > budget:
                raise ExpansionBudgetExceeded("step frontier exceeded budget")
    return StepDistribution(
        x=dist.x, n=dist.n + 1, mass=nxt, forbidden=dist.forbidden, graph=dist.graph
    )


def n_step_vector(
    chain: WeightedChain,
    x: Vertex,
    n: int,
    forbidden: Optional[ForbiddenSet] = None,
    budget: int = DEFAULT_BUDGET,
) -> StepDistribution:
    dist = initial_distribution(chain, x, forbidden)
    for _ in range(n):
        dist = step(chain, dist, budget=budget)
    return dist


def probability_table(
    chain: WeightedChain,
    x: Vertex,
    y: Vertex,
    N: int,
    forbidden: Optional[ForbiddenSet] = None,
    budget: int = DEFAULT_BUDGET,
) -> list:
    """p^(n)(x, y) (or the F-restricted variant) for n = 0..N."""
    dist = initial_distribution(chain, x, forbidden)
    table = [dist.by_vertex().get(y, 0)]
    for _ in range(N):
        dist = step(chain, dist, budget=budget)
        table.append(dist.by_vertex().get(y, 0))
    return table


@dataclass
class RhoEstimate:
    """Tail-slope estimate of limsup p^(n)(x,y)^(1/n)."""

    value: float
    period: int
    residual: float
    converged: bool
    table: list = field(repr=False, default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def rho_estimate(
    chain: WeightedChain,
    x: Vertex,
    y: Vertex,
    N: int,
    forbidden: Optional[ForbiddenSet] = None,
    tail: int = 20,
    budget: int = DEFAULT_BUDGET,
) -> RhoEstimate:
    """Periodicity-aware decay-rate estimate of the n-step probabilities.

    Shares the estimator used for word counts; polynomial prefactors (e.g.
    the n^(-1/2) of recurrent walks) bias the slope at desk horizons, which
    shows up in the residual diagnostic.
    """
    if N < 10:
        raise ValueError("N must be >= 10 for a meaningful tail estimate")
    table = probability_table(chain, x, y, N, forbidden=forbidden, budget=budget)
    if all(p == 0 for p in table):
        return RhoEstimate(
            value=0.0, period=1, residual=0.0, converged=False, table=table,
            diagnostics={"all_zero": True},
        )
    fit = fit_log_growth(table, tail=tail)
    if fit.finite:
        return RhoEstimate(
            value=0.0, period=fit.period, residual=0.0, converged=False, table=table,
            diagnostics={"finite_support": True},
        )
    return RhoEstimate(
        value=math.exp(fit.value),
        period=fit.period,
        residual=fit.residual,
        converged=fit.residual <= 0.1,
        table=table,
        diagnostics={"last_ratio": fit.last_ratio, "points_used": fit.points_used},
    )


@dataclass
class HarmonicVector:
    """Approximate positive solution of P h = rho h on a window."""

    rho_hat: float
    values: dict                       # vertex -> positive float
    residual: float                    # max |Ph - rho h| / h on the inner window
    center: Vertex
    radius: int
    scheme: str = "reflecting"
    tol: float = 1e-8
    diagnostics: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.residual <= self.tol


def _window_matrix(chain, ball, scheme):
    """Window-truncated transition matrix as CSR (windows of lazily
    generated graphs can hold hundreds of thousands of vertices)."""
    from scipy import sparse

    verts = ball.sorted_vertices()
    index = {v: i for i, v in enumerate(verts)}
    rows, cols, vals = [], [], []
    for i, v in enumerate(verts):
        edges = chain.graph.out_edges(v)
        s_full = float(sum(chain.weight(e) for e in edges))
        entries = []
        s_in = 0.0
        for e in edges:
            j = index.get(e.target)
            if j is not None:
                w = float(chain.weight(e))
                entries.append((j, w))
                s_in += w
        scale = 1.0
        if scheme == "reflecting" and 0.0 < s_in < s_full:
            scale = s_full / s_in
        for j, w in entries:
            rows.append(i)
            cols.append(j)
            vals.append(w * scale)
    n = len(verts)
    M = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return verts, index, M


def harmonic_vector(
    chain: WeightedChain,
    center: Vertex,
    radius: int,
    tol: float = 1e-8,
    scheme: str = "reflecting",
    max_iter: int = 10**5,
    budget: int = DEFAULT_BUDGET,
) -> HarmonicVector:
    """Leading eigenpair of the window-truncated transition matrix.

    ``reflecting`` renormalizes rows that leak mass out of the window back
    to their full row sum (the default: killing the boundary biases the
    eigenvalue downward on recurrent graphs); ``absorbing`` keeps the
    truncated rows.  The spread between the two schemes is reported in the
    diagnostics.  The residual is measured against the untruncated rows on
    the inner window (radius - 1), where no edge leaves the ball.
    """
    if radius < 2:
        raise ValueError("radius must be >= 2")
    if scheme not in ("reflecting", "absorbing"):
        raise ValueError(f"unknown truncation scheme {scheme!r}")
    ball = forward_ball(chain.graph, center, radius, budget=budget)
    verts, index, M = _window_matrix(chain, ball, scheme)
    other = "absorbing" if scheme == "reflecting" else "reflecting"
    _, _, M_other = _window_matrix(chain, ball, other)
    vec_tol = min(1e-10, tol * 1e-2)
    res = linalg.perron_root(M, max_iter=max_iter, vector_tol=vec_tol)
    res_other = linalg.perron_root(M_other, max_iter=max_iter)
    vec = res.vector
    if vec.min() <= 0:
        raise ChainError(
            "window eigenvector has nonpositive entries; the window is likely"
            " not strongly connected"
        )
    vec = vec / vec[index[center]]
    values = {v: float(vec[i]) for v, i in index.items()}
    rho_hat = res.value
    residual = 0.0
    for v in ball.inner(1):
        hv = values[v]
        ph = sum(
            float(chain.weight(e)) * values[e.target]
            for e in chain.graph.out_edges(v)
        )
        residual = max(residual, abs(ph - rho_hat * hv) / hv)
    return HarmonicVector(
        rho_hat=rho_hat,
        values=values,
        residual=residual,
        center=center,
        radius=radius,
        scheme=scheme,
        tol=tol,
        diagnostics={
            "rho_" + scheme: rho_hat,
            "rho_" + other: res_other.value,
            "scheme_spread": abs(rho_hat - res_other.value),
            "iterations": res.iterations,
            "window_size": len(verts),
        },
    )


def h_transform(
    chain: WeightedChain, hv: HarmonicVector, conn_k: Optional[int] = None
) -> WeightedChain:
    """Reweight p^h(e) = p(e) h(e+) / (rho h(e-)) on the harmonic window.

    With an exact harmonic vector the result is stochastic; the new edge
    floor is alpha_bar = (alpha/rho)^(conn_k + 1), which requires the
    uniform-connectedness constant.
    """
    if conn_k is None:
        conn_k = chain.graph.declared.conn_k
    if conn_k is None:
        raise ChainError("h_transform requires a uniform-connectedness constant conn_k")
    if not hv.accepted:
        raise ChainError(
            f"harmonic vector not accepted: residual {hv.residual:.3g} > tol {hv.tol:.3g}"
        )
    rho = hv.rho_hat
    values = hv.values

    def weight(e: Edge):
        try:
            hy = values[e.target]
            hx = values[e.source]
        except KeyError as exc:
            raise ChainError(
                f"edge {vertex_key(e.source)} -{e.label}-> {vertex_key(e.target)}"
                " leaves the harmonic window"
            ) from exc
        return float(chain.weight(e)) * hy / (rho * hx)

    alpha_bar = (float(chain.alpha) / rho) ** (conn_k + 1)
    return WeightedChain(graph=chain.graph, weight=weight, alpha=alpha_bar, exact=False)


@dataclass(frozen=True)
class GapCertificate:
    """Machine-checkable witness that rho_F <= bound < rho.

    ``eps0`` is the pre-transform k-step mass deficit alpha^k; the bound is
    computed from the post-transform floor ``eps0_prime`` = alpha_bar^k.
    On the stochastic fast path (rows sum to 1, rho = 1) no transform is
    needed and alpha_bar = alpha.  ``eps`` is the per-step drop:
    bound = rho * (1 - eps).
    """

    alpha: float
    D: int
    R: int
    k: int
    eps0: float
    conn_k: Optional[int]
    alpha_bar: float
    eps0_prime: float
    eps: float
    rho: float
    bound: float
    stochastic_path: bool

    def h_bound(self, sigma_size: int) -> float:
        """Entropy form log(bound * |alphabet|) of the certified bound."""
        return math.log(self.bound * sigma_size)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "D": self.D,
            "R": self.R,
            "k": self.k,
            "eps0": self.eps0,
            "conn_K": self.conn_k,
            "alpha_bar": self.alpha_bar,
            "eps0_prime": self.eps0_prime,
            "eps": self.eps,
            "rho": self.rho,
            "bound": self.bound,
            "path": "stochastic" if self.stochastic_path else "general",
        }


def certified_gap_bound(
    alpha: float,
    D: int,
    R: int,
    conn_k: Optional[int] = None,
    rho: float = 1.0,
    stochastic: bool = False,
) -> GapCertificate:
    """Compose the k-step substochasticity bound with the h-transform.

    Set k = D + R.  General path: alpha_bar = (alpha/rho)^(conn_k+1),
    eps0' = alpha_bar^k, bound = rho * (1 - eps0')^(1/k).  Stochastic fast
    path (rows sum to 1 and rho = 1): no transform, eps0' = eps0 = alpha^k.
    """
    alpha = float(alpha)
    rho = float(rho)
    if not (0 < alpha <= 1):
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if D < 0 or R < 1:
        raise ValueError(f"need D >= 0 and R >= 1, got D={D}, R={R}")
    # measured spectral radii of stochastic chains can overshoot 1 by eig noise
    if 1.0 < rho <= 1.0 + 1e-9:
        rho = 1.0
    if not (0 < rho <= 1):
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    k = D + R
    eps0 = alpha**k
    if stochastic:
        if abs(rho - 1.0) > 1e-12:
            raise ValueError("stochastic fast path requires rho = 1")
        alpha_bar = alpha
    else:
        if conn_k is None or conn_k < 1:
            raise ValueError("general path requires conn_k >= 1")
        if alpha > rho:
            raise ValueError(f"alpha {alpha} exceeds rho {rho}; weights are inconsistent")
        alpha_bar = (alpha / rho) ** (conn_k + 1)
    eps0_prime = alpha_bar**k
    if not (0 < eps0_prime < 1):
        raise ValueError(
            f"post-transform floor alpha_bar^k = {eps0_prime} outside (0, 1);"
            " the bound degenerates"
        )
    eps = 1.0 - (1.0 - eps0_prime) ** (1.0 / k)
    bound = rho * (1.0 - eps)
    assert bound < rho
    return GapCertificate(
        alpha=alpha,
        D=D,
        R=R,
        k=k,
        eps0=eps0,
        conn_k=conn_k,
        alpha_bar=alpha_bar,
        eps0_prime=eps0_prime,
        eps=eps,
        rho=rho,
        bound=bound,
        stochastic_path=stochastic,
    )


@dataclass
class RowSumCheck:
    """Result of empirically checking sum_y p_F^(k)(x, y) <= 1 - alpha^k."""

    k: int
    threshold: object
    rows: dict = field(compare=False)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def max_row_sum(self):
        return max(self.rows.values())


def k_step_restricted_rowsum_check(
    chain: WeightedChain,
    forbidden: ForbiddenSet,
    D: int,
    k: int,
    w: Window,
    tol: float = 1e-12,
    budget: int = DEFAULT_BUDGET,
) -> RowSumCheck:
    """Empirical check that restricted k-step row sums drop below 1 - alpha^k.

    With k = D + R and F relatively D-dense, every vertex can reach and read
    some forbidden word within k steps, and that excluded bundle of paths
    carries mass at least alpha^k.  A counterexample indicates a wrong D (or
    a window-boundary effect on finite inspection) and is reported as data
    rather than raised.
    """
    if k != D + forbidden.max_length:
        raise ValueError(
            f"k must equal D + R = {D} + {forbidden.max_length}, got {k}"
        )
    threshold = 1 - chain.alpha**k
    slack = 0 if chain.exact else tol
    rows = {}
    violations = []
    for x in w.sorted_vertices():
        total = n_step_vector(chain, x, k, forbidden=forbidden, budget=budget).total()
        rows[x] = total
        if total > threshold + slack:
            violations.append((x, total))
    return RowSumCheck(k=k, threshold=threshold, rows=rows, violations=violations)


@dataclass
class TransformIdentityReport:
    """Numerical check of rho_{x,y}(P^h_F) = rho_{x,y}(P_F) / rho(P)."""

    lhs: float
    rhs: float
    rho_hat: float
    difference: float
    threshold: float

    @property
    def ok(self) -> bool:
        return self.difference <= self.threshold


def transform_identity_check(
    chain: WeightedChain,
    hv: HarmonicVector,
    forbidden: ForbiddenSet,
    x: Vertex,
    y: Vertex,
    N: int,
    conn_k: Optional[int] = None,
    threshold: float = 0.05,
    tail: int = 20,
    budget: int = DEFAULT_BUDGET,
) -> TransformIdentityReport:
    transformed = h_transform(chain, hv, conn_k=conn_k)
    lhs = rho_estimate(transformed, x, y, N, forbidden=forbidden, tail=tail, budget=budget)
    rhs = rho_estimate(chain, x, y, N, forbidden=forbidden, tail=tail, budget=budget)
    difference = abs(lhs.value - rhs.value / hv.rho_hat)
    return TransformIdentityReport(
        lhs=lhs.value,
        rhs=rhs.value,
        rho_hat=hv.rho_hat,
        difference=difference,
        threshold=threshold,
    )


def entropy_from_rho(rho: float, sigma_size: int) -> float:
    """Dictionary between decay rates and entropies: log(rho * |alphabet|)."""
    if rho <= 0:
        return NEG_INF
    return math.log(rho * sigma_size)


@dataclass
class CertificateInputs:
    """User declarations and search limits for certificate resolution."""

    alpha: Optional[float] = None
    D: Optional[int] = None
    D_max: int = 8
    conn_k: Optional[int] = None
    rho: Optional[float] = None
    stochastic: Optional[bool] = None   # None = auto-detect
    window_radius: Optional[int] = None


def resolve_certificate(
    g: LabelledGraph,
    forbidden: ForbiddenSet,
    N: int,
    cert_inputs: Optional[CertificateInputs] = None,
    budget: int = DEFAULT_BUDGET,
):
    """Assemble a GapCertificate from declarations, measurements on a
    window, and (finite graphs) exact computation.

    Returns (certificate or None, scope, measured D or None, warnings).
    Scope is "global" when every ingredient is declared, exactly computed,
    or measured on a homogeneous family; otherwise "window".
    """
    inputs = cert_inputs or CertificateInputs()
    warnings: list[str] = []
    sigma = len(g.alphabet)
    alpha = inputs.alpha if inputs.alpha is not None else 1.0 / sigma
    R = forbidden.max_length

    if g.is_finite:
        w = full_window(g, budget=budget)
    else:
        radius = inputs.window_radius if inputs.window_radius is not None else min(N, 12)
        w = forward_ball(g, g.roots[0], radius, budget=budget)

    # denseness constant D
    window_scoped = False
    if inputs.D is not None:
        D = inputs.D
        result = certify_denseness(g, forbidden, D, w, budget=budget)
        if not isinstance(result, DensenessCertificate):
            warnings.append(
                f"declared denseness constant D={D} fails on the inspected window"
                f" ({len(result)} uncovered vertices); no certificate emitted"
            )
            return None, None, None, warnings
    else:
        cert = estimate_denseness_constant(g, forbidden, w, inputs.D_max, budget=budget)
        if cert is None:
            warnings.append(
                f"forbidden set is not relatively dense on the window within"
                f" D <= {inputs.D_max}; no certificate emitted"
            )
            return None, None, None, warnings
        D = cert.D
        if not g.is_finite and not g.declared.homogeneous:
            window_scoped = True

    # uniform-connectedness constant
    if inputs.conn_k is not None:
        conn_k = inputs.conn_k
    elif g.declared.conn_k is not None:
        conn_k = g.declared.conn_k
    else:
        conn_k = uniform_connectedness_constant(
            g, w, K_max=max(len(w.vertices), 1), budget=budget
        )
        if conn_k is None:
            warnings.append(
                "window is not uniformly connected (some edge has no short return"
                " path); no certificate emitted"
            )
            return None, None, D, warnings
        if not g.is_finite:
            window_scoped = True

    # spectral radius of the unrestricted chain
    if inputs.rho is not None:
        rho = inputs.rho
    elif g.declared.rho is not None:
        rho = g.declared.rho
    elif g.is_finite:
        vertices = sorted(g.vertex_list, key=vertex_key)
        index = {v: i for i, v in enumerate(vertices)}
        A = np.zeros((len(vertices), len(vertices)))
        for v in vertices:
            for e in g.out_edges(v):
                A[index[v], index[e.target]] += 1.0
        rho = linalg.perron_root(A).value / sigma
    else:
        est = rho_estimate(
            uniform_weights(g, exact=False), g.roots[0], g.roots[0], N, budget=budget
        )
        rho = min(est.value, 1.0)
        warnings.append(
            f"rho estimated from a finite horizon (N={N}, residual"
            f" {est.residual:.3g}); certificate is approximate"
        )
        window_scoped = True

    if inputs.stochastic is not None:
        stochastic = inputs.stochastic
    else:
        stochastic = (
            abs(rho - 1.0) <= 1e-12
            and abs(alpha - 1.0 / sigma) <= 1e-12
            and not check_fully_deterministic(g, w)
        )

    try:
        certificate = certified_gap_bound(
            alpha=alpha, D=D, R=R, conn_k=conn_k, rho=rho, stochastic=stochastic
        )
    except ValueError as exc:
        warnings.append(f"certificate parameters out of range: {exc}")
        return None, None, D, warnings
    scope = "window" if window_scoped else "global"
    if scope == "window":
        warnings.append(
            "certificate constants were measured on a finite window of an"
            " infinite graph; the certificate is window-scoped"
        )
    return certificate, scope, D, warnings
