"""Verification suites: each returns a list of records comparing two computations."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import stats

from . import analytic2d as a2
from . import currents as cu
from . import exact as ex
from . import samplers as sm
from . import subsets as sb
from .corpus import random_instance, shape_instances, unit_interval
from .errors import DegenerateError, DomainError, PreconditionError
from .graph import (
    WeightedGraph,
    complete_graph,
    cycle_graph,
    grid_graph,
    path_graph,
    plus_boundary_grid,
    torus_graph,
)
from .planar import boundary_wick4, fermionic_wick_2n, grid_region, planar_region

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = {
    "expansions": 1e-10,
    "switching": 1e-10,
    "ursell": 1e-10,
    "wick": 1e-10,
    "simon-lieb": 1e-12,
    "samplers": 0.01,
    "onsager": 1e-2,
    "question2": 0.0,
    "backbone": 0.0,
}
SUITES = tuple(DEFAULT_TOLERANCE)


@dataclass
class SuiteConfig:
    suite: str
    graph: WeightedGraph | None = None
    betas: tuple[float, ...] = ()
    hs: tuple[float, ...] = ()
    seed: int = 0
    trials: int | None = None
    tolerance: float | None = None

    def __post_init__(self):
        if self.suite not in DEFAULT_TOLERANCE:
            raise DomainError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if self.trials is not None and self.trials < 1:
            raise DomainError("trials must be at least 1")

    @property
    def tol(self) -> float:
        return DEFAULT_TOLERANCE[self.suite] if self.tolerance is None else self.tolerance

    def n_trials(self, default: int) -> int:
        return default if self.trials is None else self.trials


@dataclass(frozen=True)
class Record:
    identity: str
    anchor: str
    instance: str
    lhs: float
    rhs: float
    gap: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def equal(identity, anchor, instance, lhs, rhs, tol, relative=False) -> Record:
    gap = abs(lhs - rhs)
    if relative:
        gap /= max(1.0, abs(lhs), abs(rhs))
    return Record(identity, anchor, instance, float(lhs), float(rhs), float(gap), tol, bool(gap <= tol))


def at_most(identity, anchor, instance, lhs, rhs, slack) -> Record:
    """``lhs <= rhs`` up to ``slack``; the gap is ``lhs - rhs``."""
    gap = lhs - rhs
    return Record(identity, anchor, instance, float(lhs), float(rhs), float(gap), slack, bool(gap <= slack))


def describe(g: WeightedGraph, **extra) -> str:
    parts = [f"n={g.n_vertices}", f"pairs={len(g.lattice_couplings())}", f"beta={g.beta:.6g}", f"h={g.h:.6g}"]
    parts += [f"{k}={v}" for k, v in extra.items()]
    return " ".join(parts)


def _sorted_set(A) -> str:
    return "{" + ",".join(map(str, sorted(A))) + "}"


def _parameters(cfg: SuiteConfig, rng: np.random.Generator, draws: int) -> list[tuple[float, float]]:
    if cfg.betas:
        return [(b, h) for b in cfg.betas for h in (cfg.hs or (cfg.graph.h if cfg.graph else 0.0,))]
    return [(float(b), float(h)) for b, h in unit_interval(rng, (draws, 2))]


def _graph_instances(cfg: SuiteConfig, rng: np.random.Generator, draws: int) -> Iterator[WeightedGraph]:
    """The configured graph at configured or random ``(beta, h)``, with and without field."""
    g = cfg.graph
    explicit_ghost = g.has_ghost and g.h == 0
    for beta, h in _parameters(cfg, rng, draws):
        base = g.with_beta(beta)
        if explicit_ghost:
            yield base
            continue
        yield base.with_field(0.0)
        if h > 0:
            yield base.with_field(h)


# --- expansions ---------------------------------------------------------------------


_EXPANSIONS = (
    ("corr: current expansion vs enumeration", "ratio of current sums with sources A", ex.current_corr),
    ("corr: high-temperature expansion vs enumeration", "tanh-weighted edge sets with odd set A", ex.ht_corr),
    ("corr: random-cluster expansion vs enumeration", "random-cluster probability of the even-meeting event", ex.fk_corr),
)


def expansion_records(g: WeightedGraph, tol: float) -> list[Record]:
    out = []
    subsets = ex.all_subsets(g.n_vertices)
    spin = {A: ex.corr_spin(g, A) for A in subsets}
    for identity, anchor, fn in _EXPANSIONS:
        worst = max(((abs(fn(g, A) - spin[A]), A) for A in subsets), key=lambda t: t[0])
        A = worst[1]
        out.append(equal(identity, anchor, describe(g, worst_A=_sorted_set(A)), spin[A], fn(g, A), tol))
    out.append(
        equal(
            "Z: low-temperature expansion vs enumeration",
            "sum over contour sets with prefactor",
            describe(g),
            ex.z_spin(g),
            ex.lt_partition(g),
            tol,
            relative=True,
        )
    )
    return out


def run_expansions(cfg: SuiteConfig) -> list[Record]:
    rng = np.random.default_rng(cfg.seed)
    if cfg.graph is None:
        graphs = shape_instances(4, cfg.n_trials(20), seed=cfg.seed)
    else:
        graphs = _graph_instances(cfg, rng, cfg.n_trials(20))
    return [r for g in graphs for r in expansion_records(g, cfg.tol)]


# --- switching -----------------------------------------------------------------------


def functional_bank(g: WeightedGraph, rng: np.random.Generator, A, B) -> list[tuple[str, np.ndarray]]:
    """Ten functionals of the union trace, tabulated over edge masks."""
    m = g.n_edges
    masks = np.arange(1 << m, dtype=np.int64)
    size = sb.popcount(masks).astype(float)
    ends = g.edge_endpoints()
    labels = lambda fn: sb.subset_table(g.n_sites, ends, fn)
    sites = sorted(set(A) | set(B)) or [0]
    x, y = (int(v) for v in rng.integers(0, g.n_vertices, 2))
    return [
        ("one", np.ones(1 << m)),
        ("first pair open", (masks & 1).astype(float)),
        ("trace size", size),
        (f"{x}<->{y}", labels(lambda lab: (lab[:, x] == lab[:, y]).astype(float))),
        ("cluster count", labels(lambda lab: sb.component_count(lab).astype(float))),
        ("empty trace", (masks == 0).astype(float)),
        ("trace size parity", (size % 2 == 1).astype(float)),
        ("exp(-size/2)", np.exp(-size / 2)),
        ("sources joined", labels(lambda lab: sb.all_connected(lab, sites).astype(float))),
        ("random table", rng.random(1 << m)),
    ]


def _random_sets(g: WeightedGraph, rng: np.random.Generator) -> tuple[frozenset[int], frozenset[int]]:
    pick = lambda: frozenset(int(v) for v in np.flatnonzero(rng.random(g.n_vertices) < 0.5))
    return pick(), pick()


def _tag(k: int | None, text: str) -> str:
    return text if k is None else f"#{k} {text}"


def switching_records(g: WeightedGraph, rng: np.random.Generator, tol: float, k: int | None = None) -> list[Record]:
    A, B = _random_sets(g, rng)
    inst = _tag(k, describe(g, A=_sorted_set(A), B=_sorted_set(B)))
    out = []
    s = cu.squared_corr_identity(g, A)
    out.append(equal("squared correlation via two sourceless currents", "<s_A>^2 = P0 x P0[even-meeting event]", inst, s.lhs, s.rhs, tol))
    try:
        gg = cu.griffiths2_gap(g, A, B)
        out.append(equal("Griffiths II gap: spins vs currents", "1 - <s_A><s_B>/<s_A s_B> = P0 x P(A^B)[not even-meeting]", inst, gg.spin, gg.currents, tol))
    except DegenerateError:
        pass
    for name, table in functional_bank(g, rng, A, B):
        sv = cu.switching_verify(g, A, B, table)
        out.append(equal(f"switching lemma, F = {name}", "Z_A Z_B E[F] = Z_0 Z_(A^B) E[F; even-meeting]", inst, sv.lhs, sv.rhs, tol, relative=True))
    return out


def ursell_records(g: WeightedGraph, rng: np.random.Generator, tol: float, k: int | None = None) -> list[Record]:
    """Empty when the four-point law is degenerate (no current configuration joins the sites)."""
    xs = [int(v) for v in rng.permutation(g.n_vertices)[:4]]
    inst = _tag(k, describe(g, sites=tuple(xs)))
    try:
        u = cu.ursell4(g, *xs)
    except DegenerateError:
        return []
    return [
        equal("Ursell function via double currents", "U4 = -2 <s1 s3><s2 s4> P[all four joined]", inst, u.direct, u.via_currents, tol),
        at_most("Ursell function sign", "U4 <= 0", inst, u.direct, 0.0, 1e-12),
    ]


def run_switching(cfg: SuiteConfig) -> list[Record]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for k, g in enumerate(_switching_graphs(cfg, rng, 4)):
        out += switching_records(g, rng, cfg.tol, k)
        if g.n_vertices >= 4:
            out += ursell_records(g, rng, cfg.tol, k)
    return out


def _switching_graphs(cfg: SuiteConfig, rng: np.random.Generator, min_vertices: int) -> Iterator[WeightedGraph]:
    n = cfg.n_trials(200)
    if cfg.graph is not None:
        yield from itertools.islice(itertools.cycle(list(_graph_instances(cfg, rng, n))), n)
        return
    for _ in range(n):
        g = random_instance(rng, 5)
        while g.n_vertices < min_vertices and rng.random() < 0.5:
            g = random_instance(rng, 5)
        yield g


def run_ursell(cfg: SuiteConfig) -> list[Record]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    n = cfg.n_trials(200)
    if cfg.graph is not None:
        if cfg.graph.n_vertices < 4:
            raise PreconditionError("the Ursell suite needs at least 4 vertices")
        graphs = itertools.islice(itertools.cycle(list(_graph_instances(cfg, rng, n))), n)
        for k, g in enumerate(graphs):
            out += ursell_records(g, rng, cfg.tol, k)
        return out
    # random instances: draw until n of them are non-degenerate
    k = 0
    while k < n:
        recs = ursell_records(_four_plus(rng), rng, cfg.tol, k)
        k += bool(recs)
        out += recs
    return out


def _four_plus(rng: np.random.Generator) -> WeightedGraph:
    while True:
        g = random_instance(rng, 5)
        if g.n_vertices >= 4:
            return g


# --- planar Wick ------------------------------------------------------------------------


def _boundary_sites(region) -> list[int]:
    seen: list[int] = []
    for v in region.boundary:
        if v not in seen:
            seen.append(v)
    return seen


def wick_records(region, beta: float, tol: float) -> list[Record]:
    """Four-point rule for every ccw quadruple of distinct boundary sites."""
    label = f"region={len(region.cells)} cells beta={beta:.6g}"
    out = []
    for pts in itertools.combinations(_boundary_sites(region), 4):
        s = boundary_wick4(region, *pts)
        out.append(equal("planar boundary four-point Wick rule", "<s1s2s3s4> = <12><34> - <13><24> + <14><23>", f"{label} points={pts}", s.lhs, s.rhs, tol))
    return out


def six_point_records(region, beta: float, tol: float, count: int, rng: np.random.Generator) -> list[Record]:
    """Six-point rule on ``count`` random ccw sextuples of boundary sites."""
    combos = list(itertools.combinations(_boundary_sites(region), 6))
    idx = rng.choice(len(combos), size=min(count, len(combos)), replace=False)
    label = f"region={len(region.cells)} cells beta={beta:.6g}"
    out = []
    for i in sorted(idx):
        s = fermionic_wick_2n(region, combos[i])
        out.append(equal("planar boundary six-point fermionic Wick rule", "signed sum over pairings, sign (-1)^crossings", f"{label} points={combos[i]}", s.lhs, s.rhs, tol))
    return out


def run_wick(cfg: SuiteConfig) -> list[Record]:
    rng = np.random.default_rng(cfg.seed)
    betas = cfg.betas or (0.2, 0.4, 0.6)
    cells = [_region_from_graph(cfg.graph)] if cfg.graph is not None else [_rectangle(2, 2), _rectangle(3, 3)]
    out = []
    for shape in cells:
        for beta in betas:
            region = planar_region(shape, beta)
            out += wick_records(region, beta, cfg.tol)
            if len(_boundary_sites(region)) >= 6 and cfg.graph is not None:
                out += six_point_records(region, beta, cfg.tol, cfg.n_trials(40), rng)
    if cfg.graph is None:
        out += six_point_records(grid_region(4, 4, 0.3), 0.3, cfg.tol, cfg.n_trials(40), rng)
    return out


def _rectangle(w: int, h: int) -> list[tuple[int, int]]:
    return [(c, r) for r in range(h) for c in range(w)]


def _region_from_graph(g: WeightedGraph) -> list[tuple[int, int]]:
    """Recover grid cells from a graph built by the grid generator."""
    for w in range(1, g.n_vertices + 1):
        if g.n_vertices % w:
            continue
        h = g.n_vertices // w
        if grid_graph(w, h).couplings == tuple((x, y, J) for x, y, J in g.couplings):
            return _rectangle(w, h)
    raise PreconditionError("the Wick suite needs a rectangular grid graph (generator grid:WxH)")


# --- inequalities ----------------------------------------------------------------------


def inequality_records(g: WeightedGraph, rng: np.random.Generator, slack: float) -> list[Record]:
    out = []
    inst = describe(g)
    subsets = ex.all_subsets(g.n_vertices)
    corr = {A: ex.corr_spin(g, A) for A in subsets}
    worst = min(subsets, key=corr.__getitem__)
    out.append(at_most("Griffiths I", "<s_A> >= 0", describe(g, A=_sorted_set(worst)), -corr[worst], 0.0, slack))
    gap, wa, wb = min((corr[A ^ B] - corr[A] * corr[B], A, B) for A in subsets for B in subsets)
    out.append(at_most("Griffiths II", "<s_A s_B> >= <s_A><s_B>", describe(g, A=_sorted_set(wa), B=_sorted_set(wb)), corr[wa] * corr[wb], corr[wa ^ wb], slack))
    if g.n_vertices >= 2:
        sites = list(range(g.n_vertices))
        x = int(rng.integers(g.n_vertices))
        rest = [v for v in sites if v != x]
        S = frozenset(v for v in rest if rng.random() < 0.6) or frozenset(rest[:1])
        x0 = int(rng.choice(sorted(S)))
        sl = ex.simon_lieb_check(g, S, x0, x, slack)
        out.append(at_most("Simon-Lieb (finite volume)", "<s0 sx> <= sum over boundary of S of <s0 sy>_S <sy sx>", describe(g, S=_sorted_set(S), x0=x0, x=x), sl.lhs, sl.rhs, slack))
    A = subsets[int(rng.integers(len(subsets)))]
    if g.beta > 1e-3:
        bd = ex.beta_derivative_check(g, A)
        out.append(equal("beta derivative of <s_A>", "d<s_A>/dbeta = sum_xy J_xy (<s_A s_x s_y> - <s_A><s_x s_y>)", describe(g, A=_sorted_set(A)), bd.analytic, bd.numeric, 1e-6))
    return out


def run_simon_lieb(cfg: SuiteConfig) -> list[Record]:
    rng = np.random.default_rng(cfg.seed)
    if cfg.graph is None:
        graphs = itertools.chain(shape_instances(4, cfg.n_trials(20), seed=cfg.seed), (random_instance(rng, 5) for _ in range(cfg.n_trials(20) * 5)))
    else:
        graphs = _graph_instances(cfg, rng, cfg.n_trials(20))
    return [r for g in graphs for r in inequality_records(g, rng, cfg.tol)]


# --- backbone ----------------------------------------------------------------------------


def run_backbone(cfg: SuiteConfig) -> list[Record]:
    """Exhaustive small currents, then random larger ones."""
    rng = np.random.default_rng(cfg.seed)
    shapes = [((0, 1), (1, 2), (2, 3), (0, 3)), ((0, 1), (0, 2), (0, 3), (1, 2)), ((0, 1), (1, 2), (2, 3), (1, 3)), ((0, 1), (1, 2), (0, 2))]
    bad = total = 0
    for edges in shapes:
        for counts in itertools.product(range(4), repeat=len(edges)):
            n = cu.Current.from_mapping(4, dict(zip(edges, counts)))
            total += 1
            bad += not _backbone_ok(n)
    out = [equal("backbone decomposition, exhaustive", "sources(n) = A iff backbone endpoints partition A and other walks close", f"{total} currents, counts <= 3 on <= 4 pairs", bad, 0, 0.0)]
    bad = 0
    trials = cfg.n_trials(10_000)
    for _ in range(trials):
        k = int(rng.integers(2, 7))
        pairs = [(x, y) for x in range(k) for y in range(x + 1, k)]
        counts = rng.integers(0, 5, len(pairs)) * (rng.random(len(pairs)) < 0.5)
        bad += not _backbone_ok(cu.Current.from_mapping(k, dict(zip(pairs, counts.tolist()))))
    out.append(equal("backbone peel/reconstruct round trip", "walk family reproduces the current", f"{trials} random currents", bad, 0, 0.0))
    return out


def _backbone_ok(n: cu.Current) -> bool:
    A = cu.sources(n)
    d = cu.backbone_peel(n, A)
    if not cu.backbone_valid(d, A) or cu.backbone_reconstruct(d) != n:
        return False
    if cu.walk_family_sources(n.n_vertices, d.walks) != A:
        return False
    wrong = A ^ {0}
    try:
        cu.backbone_peel(n, wrong)
    except PreconditionError:
        return True
    return False


# --- samplers ---------------------------------------------------------------------------


def run_samplers(cfg: SuiteConfig) -> list[Record]:
    samples = cfg.n_trials(100_000)
    tv = cfg.tol
    out = []
    seeds = np.random.SeedSequence(cfg.seed).generate_state(8)

    tri = complete_graph(3, beta=0.7)
    codes = sm.run_chain(tri, sm.ChainSpec("current", samples=samples, thin=10, seed=int(seeds[0])))
    exact_law = cu.trace_law_exact(tri, ()).pmf
    out.append(at_most("current chain vs exact trace law (TV)", "trace law of sourceless currents", describe(tri), sm.total_variation(sm.empirical_law(codes, 8), exact_law), tv, 0.0))

    tri = complete_graph(3, beta=0.6)
    codes = sm.run_chain(tri, sm.ChainSpec("current", sources=(0, 1), samples=samples, thin=10, seed=int(seeds[1])))
    exact_law = cu.trace_law_exact(tri, (0, 1)).pmf
    out.append(at_most("current chain with sources vs exact trace law (TV)", "trace law of currents with sources {0,1}", describe(tri), sm.total_variation(sm.empirical_law(codes, len(exact_law)), exact_law), tv, 0.0))

    box = grid_graph(2, 2, beta=0.5, h=0.3)
    codes = sm.run_chain(box, sm.ChainSpec("ht", samples=samples, thin=5, seed=int(seeds[2])))
    out.append(at_most("even-subgraph chain vs exact law (TV)", "edge sets weighted by prod tanh", describe(box), sm.total_variation(sm.empirical_law(codes, 1 << box.n_edges), ht_law(box)), tv, 0.0))

    spins = grid_graph(2, 2, beta=0.4, h=0.2)
    codes = sm.run_chain(spins, sm.ChainSpec("spin", samples=samples, thin=4, seed=int(seeds[3])))
    out.append(at_most("Glauber chain vs Gibbs law (TV)", "Gibbs measure", describe(spins), sm.total_variation(sm.empirical_law(codes, 1 << spins.n_vertices), ex.spin_law(spins)), tv, 0.0))

    out += sprinkle_records(complete_graph(3, beta=0.6), samples, int(seeds[4]))

    m_star = plus_boundary_magnetization(24, 0.6, seed=int(seeds[5]))
    exact_m = a2.onsager_magnetization(0.6)
    out.append(equal("magnetization with + boundary vs spontaneous magnetization", "m* = (1 - sinh(2b)^-4)^(1/8)", "24x24 grid beta=0.6", m_star.mean, exact_m, 0.02))

    est, exact_c = torus_two_point(8, 0.3, (0, 0), (2, 3), seed=int(seeds[6]))
    out.append(at_most("torus two-point function vs transfer matrix (standard errors)", "transfer-matrix correlation", "8x8 torus beta=0.3 (0,0)-(2,3)", abs(est.mean - exact_c) / est.stderr, 3.0, 0.0))
    return out


def ht_law(g: WeightedGraph, A=()) -> np.ndarray:
    masks = ex.parity_classes(g, A)
    x = sb.subset_products(np.tanh(g.edge_strengths()))[masks]
    p = np.zeros(1 << g.n_edges)
    p[masks] = x / x.sum()
    return p


def sprinkle_records(g: WeightedGraph, samples: int, seed: int) -> list[Record]:
    """Exact draws of the even-subgraph law pushed through both sprinkles."""
    rng = sm.make_rng(seed)
    base = ht_law(g)
    E = rng.choice(len(base), size=samples, p=base)
    T = sm.sprinkle_ht_to_current(E, g, rng)
    F = sm.sprinkle_current_to_fk(T, g, rng)
    out = []
    size = 1 << g.n_edges
    for name, drawn, target in (("current trace", T, cu.trace_law_exact(g, ()).pmf), ("random-cluster", F, ex.fk_law(g))):
        observed = np.bincount(drawn, minlength=size)
        support = target > 0
        p = stats.chisquare(observed[support], samples * target[support]).pvalue
        rec = at_most(f"sprinkled edge sets vs {name} law (chi-square p above threshold)", "sprinkling couples the three edge laws", describe(g), 1e-3, float(p), 0.0)
        out.append(replace(rec, passed=rec.passed and observed[~support].sum() == 0))
    fk = ex.fk_law(g)
    bits = sb.mask_bits(np.arange(size), g.n_edges)
    exact_marg = fk @ bits
    emp = sb.mask_bits(F, g.n_edges).mean(axis=0)
    for e in range(g.n_edges):
        se = math.sqrt(exact_marg[e] * (1 - exact_marg[e]) / samples)
        out.append(at_most(f"sprinkled edge marginal, pair {g.edges[e][:2]} (standard errors)", "random-cluster edge marginal", describe(g), abs(emp[e] - exact_marg[e]) / se, 3.0, 0.0))
    return out


def plus_boundary_magnetization(L: int, beta: float, sweeps: int = 4000, burn_in: int = 500, seed: int = 0) -> sm.EstimatorResult:
    """Mean magnetization of an ``L x L`` grid with all-plus boundary, by colour sweeps."""
    g = plus_boundary_grid(L, L, beta)
    spec = sm.ChainSpec("spin", samples=sweeps, burn_in=burn_in, sweep=True, seed=seed)
    return sm.estimate(g, lambda s: float(s.mean()), spec)


def torus_two_point(L: int, beta: float, a, b, sweeps: int = 20_000, seed: int = 0) -> tuple[sm.EstimatorResult, float]:
    g = torus_graph(L, L, beta)
    ia, ib = a[0] * L + a[1], b[0] * L + b[1]
    spec = sm.ChainSpec("spin", samples=sweeps, burn_in=1000, sweep=True, seed=seed)
    est = sm.estimate(g, lambda s: float(s[ia] * s[ib]), spec)
    return est, a2.torus_correlation(L, L, beta, a, b)


# --- Onsager ------------------------------------------------------------------------------


def run_onsager(cfg: SuiteConfig) -> list[Record]:
    out = []
    bc = a2.critical_beta_2d()
    out.append(equal("critical point", "sinh(2 beta_c) = 1", f"beta_c={bc!r}", math.sinh(2 * bc), 1.0, 1e-15))
    for beta in cfg.betas or (0.2, 0.3):
        f = a2.onsager_free_energy(beta, 512)
        gaps = [abs(a2.strip_free_energy(a2.StripSpec(W, beta)) - f) for W in (4, 6, 8, 10)]
        out.append(equal("strip free energy, W=10, vs Onsager integral", "Onsager free energy", f"beta={beta:.6g}", a2.strip_free_energy(a2.StripSpec(10, beta)), f, cfg.tol))
        increases = sum(b >= a for a, b in zip(gaps, gaps[1:]))
        out.append(equal("strip gap decreasing in W over 4,6,8,10", "finite-width convergence", f"beta={beta:.6g} gaps={[float(f'{x:.3e}') for x in gaps]}", increases, 0, 0.0))
        doubling = abs(a2.onsager_free_energy(beta, 512) - a2.onsager_free_energy(beta, 256))
        out.append(at_most("quadrature self-convergence (256 -> 512 nodes)", "periodic midpoint rule", f"beta={beta:.6g}", doubling, 1e-8, 0.0))
    return out


# --- Question 2 -------------------------------------------------------------------------------


def question2_rows(cfg: SuiteConfig) -> list[dict]:
    betas = cfg.betas or tuple(round(0.1 * k, 10) for k in range(0, 11))
    if cfg.graph is not None:
        targets = [("graph", cfg.graph, {0}, {cfg.graph.n_vertices - 1})]
    else:
        targets = [
            ("path:4", path_graph(4), {0}, {3}),
            ("cycle:4", cycle_graph(4), {0}, {2}),
            ("complete:3", complete_graph(3), {0}, {1, 2}),
            ("grid:2x3", grid_graph(2, 3), {0, 1}, {5}),
        ]
    rows = []
    for name, g, A, B in targets:
        for row in cu.question2_scan(g, A, B, betas):
            rows.append({"graph": name, "A": _sorted_set(A), "B": _sorted_set(B), "h": g.h, **row})
    return rows


def run_question2(cfg: SuiteConfig) -> list[Record]:
    rows = question2_rows(cfg)
    out = []
    for name in dict.fromkeys(r["graph"] for r in rows):
        mine = [r for r in rows if r["graph"] == name]
        diffs = [r["diff"] for r in mine if r["diff"] is not None]
        low = min(diffs) if diffs else 0.0
        if low < 0:
            log.warning("question 2 scan on %s is not monotone (smallest step %.3e)", name, low)
        inst = f"{name} A={mine[0]['A']} B={mine[0]['B']} betas={len(mine)}"
        out.append(Record("double-current connection probability, smallest beta step (report only)", "is P0 x P0[A <-> B] increasing in beta?", inst, float(low), 0.0, float(low), 0.0, True))
    return out


RUNNERS: dict[str, Callable[[SuiteConfig], list[Record]]] = {
    "expansions": run_expansions,
    "switching": run_switching,
    "ursell": run_ursell,
    "wick": run_wick,
    "simon-lieb": run_simon_lieb,
    "samplers": run_samplers,
    "onsager": run_onsager,
    "question2": run_question2,
    "backbone": run_backbone,
}


def run_records(cfg: SuiteConfig) -> list[Record]:
    return RUNNERS[cfg.suite](cfg)


def torus_sweep_rows(L: int, betas: Sequence[float], a=(0, 0), b=(2, 3), sweeps: int = 20_000, seed: int = 0) -> list[dict]:
    """Two-point function on the ``L x L`` torus by colour-sweep Monte Carlo and by transfer matrix."""
    rows = []
    seeds = np.random.SeedSequence(seed).generate_state(len(betas))
    label = f"<s{tuple(a)} s{tuple(b)}>"
    for beta, s in zip(betas, seeds):
        est, exact_value = torus_two_point(L, float(beta), a, b, sweeps=sweeps, seed=int(s))
        rows.append({"beta": float(beta), "h": 0.0, "observable": label, "value": est.mean, "stderr": est.stderr, "method": "monte-carlo"})
        rows.append({"beta": float(beta), "h": 0.0, "observable": label, "value": exact_value, "stderr": 0.0, "method": "transfer-matrix"})
        # distance in standard errors; within 3 means agreement
        sigmas = abs(est.mean - exact_value) / est.stderr if est.stderr > 0 else float("inf")
        rows.append({"beta": float(beta), "h": 0.0, "observable": f"{label} |mc - exact| / stderr", "value": sigmas, "stderr": 0.0, "method": "agreement"})
    return rows
