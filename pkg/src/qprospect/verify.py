"""Seeded invariant suite behind ``qprospect verify``.

Each check draws its own samples from a generator seeded with ``seed`` plus a
per-check offset, so results are identical across runs and independent of
check order.  A check reports the worst observed defect against its
tolerance.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channels as ch
from . import eventlogic as ev
from . import probability as pr
from . import qdt
from .numkernel import eig_hermitian, kron, partial_trace
from .qstate import (
    DensityOperator,
    HilbertSpace,
    UnitaryOperator,
    dephase,
    evolve,
    product_space,
    pure_density,
    random_density,
    random_hermitian,
    random_state_vector,
    random_unitary,
    validate_density,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    module: str
    passed: bool
    worst: float
    tolerance: float
    samples: int
    seconds: float


def _rand_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _rank_one(space: HilbertSpace, rng) -> ev.EventOperator:
    return ev.vector_projector(space, random_state_vector(space, rng).amplitudes)


def _random_projector(dim: int, rng) -> ev.EventOperator:
    rank = int(rng.integers(0, dim + 1))
    if rank == 0:
        return ev.zero_event(HilbertSpace(dim))
    return ev.vector_projector(HilbertSpace(dim), _rand_complex(rng, (dim, rank)))


# -- numkernel --------------------------------------------------------------------

def check_kron_associative(rng, n=60):
    worst = 0.0
    for _ in range(n):
        a, b, c = (rng.integers(-5, 6, size=(2, 2)) for _ in range(3))
        worst = max(worst, float(np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c))))))
    return worst, n


def check_partial_trace_trace(rng, n=100):
    worst = 0.0
    for _ in range(n):
        dims = [int(d) for d in rng.integers(1, 4, size=int(rng.integers(1, 4)))]
        m = random_hermitian(int(np.prod(dims)), rng)
        keep = [k for k in range(len(dims)) if rng.random() < 0.5]
        worst = max(worst, abs(np.trace(partial_trace(m, dims, keep)) - np.trace(m)))
    return worst, n


def check_partial_trace_product(rng, n=100):
    worst = 0.0
    for _ in range(n):
        da, db = (int(x) for x in rng.integers(1, 5, size=2))
        a, b = _rand_complex(rng, (da, da)), _rand_complex(rng, (db, db))
        worst = max(worst, float(np.max(np.abs(partial_trace(kron(a, b), [da, db], [0]) - np.trace(b) * a))))
    return worst, n


def check_eig_reconstruction(rng, n=100):
    worst = 0.0
    for _ in range(n):
        m = random_hermitian(int(rng.integers(1, 9)), rng)
        w, v = eig_hermitian(m)
        worst = max(worst, float(np.linalg.norm(m - (v * w) @ v.conj().T)) / max(1.0, float(np.linalg.norm(m))))
    return worst, n


# -- qstate -----------------------------------------------------------------------

def check_pure_idempotent(rng, n=100):
    worst = 0.0
    for _ in range(n):
        p = pure_density(random_state_vector(HilbertSpace(int(rng.integers(1, 7))), rng)).matrix
        worst = max(worst, float(np.linalg.norm(p @ p - p)))
    return worst, n


def check_evolve_preserves(rng, n=100):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 7))
        rho = random_density(d, rng)
        out = evolve(rho, random_unitary(d, rng))
        worst = max(worst, abs(np.trace(out.matrix) - 1),
                    float(np.max(np.abs(np.sort(out.spectrum()) - np.sort(rho.spectrum())))))
    return worst, n


def check_dephase_idempotent(rng, n=100):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 7))
        rho = random_density(d, rng)
        basis = random_unitary(d, rng).matrix
        once = dephase(rho, basis)
        twice = dephase(once, basis)
        worst = max(worst, float(np.linalg.norm(twice.matrix - once.matrix)))
        if not validate_density(once).passed:
            worst = math.inf
    return worst, n


# -- eventlogic -------------------------------------------------------------------

def check_lattice_laws(rng, n=60):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 5))
        p, q, r = (_random_projector(d, rng) for _ in range(3))
        pairs = [
            (ev.join(p, q), ev.join(q, p)),
            (ev.join(ev.join(p, q), r), ev.join(p, ev.join(q, r))),
            (ev.meet(ev.meet(p, q), r), ev.meet(p, ev.meet(q, r))),
            (ev.join(p, p), p),
            (ev.meet(p, p), p),
        ]
        worst = max(worst, max(float(np.linalg.norm(x.matrix - y.matrix)) for x, y in pairs))
    return worst, n


def spin_half_logic() -> dict:
    """Spin-1/2 non-distributivity witness; values are Frobenius norms/defects."""
    sp = HilbertSpace(2, ("up", "down"))
    a = ev.vector_projector(sp, np.array([1, 1]) / np.sqrt(2))
    b1 = ev.projector(sp, [0])
    b2 = ev.projector(sp, [1])
    ident = np.eye(2)
    lhs = ev.meet(a, ev.join(b1, b2))
    rhs = ev.join(ev.meet(a, b1), ev.meet(a, b2))
    return {
        "join_b1_b2_minus_identity": float(np.linalg.norm(ev.join(b1, b2).matrix - ident)),
        "meet_a_b1_norm": float(np.linalg.norm(ev.meet(a, b1).matrix)),
        "meet_a_b2_norm": float(np.linalg.norm(ev.meet(a, b2).matrix)),
        "lhs_minus_a": float(np.linalg.norm(lhs.matrix - a.matrix)),
        "rhs_norm": float(np.linalg.norm(rhs.matrix)),
        "a_norm": float(np.linalg.norm(a.matrix)),
    }


def check_non_distributive(rng):
    r = spin_half_logic()
    worst = max(r["join_b1_b2_minus_identity"], r["meet_a_b1_norm"], r["meet_a_b2_norm"],
                r["lhs_minus_a"], r["rhs_norm"])
    if r["a_norm"] < 0.5:
        worst = math.inf
    return worst, 1


def check_inconclusive_not_union(rng, n=100):
    # worst is the smallest separation; reported as its reciprocal so "small is good"
    smallest = math.inf
    for _ in range(n):
        d = int(rng.integers(2, 6))
        b = _rand_complex(rng, d)
        b /= np.linalg.norm(b)
        p_b = ev.inconclusive_operator(ev.InconclusiveEvent.of(b))
        union = ev.projector(HilbertSpace(d), np.flatnonzero(b), union=True)
        smallest = min(smallest, float(np.linalg.norm(p_b.matrix - union.matrix)))
    return (1.0 / smallest if smallest > 0 else math.inf), n


def check_prospect_scaling(rng, n=100):
    worst = 0.0
    for k in range(n):
        da, db = (int(x) for x in rng.integers(1, 4, size=2))
        b = _rand_complex(rng, db)
        b /= np.linalg.norm(b)
        if k % 2:
            b *= rng.uniform(0.3, 0.95)
        pi = ev.Prospect(HilbertSpace(da), int(rng.integers(0, da)), ev.InconclusiveEvent.of(b))
        m = ev.prospect_operator(pi, check_norm=False).matrix
        worst = max(worst, float(np.linalg.norm(m @ m - pi.norm_squared * m)))
    return worst, n


def check_lift_degeneracy(rng, n=30):
    worst = 0.0
    for _ in range(n):
        u = random_unitary(3, rng).matrix
        obs = u @ np.diag([1.0, 1.0, 2.0]) @ u.conj().T
        rho = random_density(3, rng)
        res = ev.lift_degeneracy(obs, rho, gamma=random_hermitian(3, rng))
        worst = max(worst, abs(sum(res.probabilities) - res.degenerate_probability))
        if min(res.probabilities) < 0:
            worst = math.inf
    return worst, n


# -- probability ------------------------------------------------------------------

def _luders_draws(rng, n):
    for _ in range(n):
        d = int(rng.integers(2, 6))
        sp = HilbertSpace(d)
        yield random_density(sp, rng), _rank_one(sp, rng), _rank_one(sp, rng)


def check_luders_symmetry(rng, n=100):
    worst = 0.0
    for rho, pa, pn in _luders_draws(rng, n):
        pair = pr.SequentialPair(rho, pa, pn)
        worst = max(worst, abs(pr.luders_probability(pair) - pr.luders_probability(pair.swapped())))
    return worst, n


def check_wigner_relation(rng, n=100):
    worst = 0.0
    for rho, pa, pn in _luders_draws(rng, n):
        pair = pr.SequentialPair(rho, pa, pn)
        worst = max(worst, abs(pr.wigner_probability(pair)
                               - pr.luders_probability(pair) * pr.event_probability(rho, pa)))
    return worst, n


def check_luders_commuting(rng, n=100):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 6))
        sp = HilbertSpace(d)
        rho = random_density(sp, rng)
        u = UnitaryOperator(sp, random_unitary(d, rng).matrix)
        events = [ev.rotate_event(ev.projector(sp, [k]), u) for k in range(d)]
        for a in range(d):
            for m in range(d):
                val = pr.luders_probability(pr.SequentialPair(rho, events[a], events[m]))
                worst = max(worst, abs(val - (1.0 if a == m else 0.0)))
    return worst, n


def check_luders_degenerate_asymmetry(rng):
    rho, first, second = degenerate_asymmetry_witness()
    pair = pr.SequentialPair(rho, first, second)
    gap = abs(pr.luders_probability(pair) - pr.luders_probability(pair.swapped()))
    return (1e-3 / gap if gap > 0 else math.inf), 1


def degenerate_asymmetry_witness():
    """Seeded state with a rank-2 and a rank-1 event whose Lüders directions differ."""
    rng = np.random.default_rng(2024)
    sp = HilbertSpace(3)
    rho = random_density(sp, rng)
    first = ev.projector(sp, [0, 1])
    second = ev.vector_projector(sp, np.array([1.0, 1.0, 1.0]) / np.sqrt(3))
    return rho, first, second


def _random_lattice(rng, da, db):
    prospects = []
    for n in range(da):
        b = _rand_complex(rng, db)
        b /= np.linalg.norm(b)
        prospects.append(ev.Prospect(HilbertSpace(da), n, ev.InconclusiveEvent.of(b, HilbertSpace(db)), f"pi{n}"))
    return qdt.ProspectLattice.from_prospects(prospects)


def check_decomposition(rng, n=100):
    worst = 0.0
    for _ in range(n):
        da, db = (int(x) for x in rng.integers(2, 5, size=2))
        rho = random_density(product_space([da, db]), rng)
        for pi in _random_lattice(rng, da, db).prospects:
            d = pr.prospect_probability(rho, pi)
            worst = max(worst, abs(d.total - (d.utility_factor + d.attraction_factor)) / max(abs(d.total), 1e-300))
            if not (-1e-12 <= d.total <= 1 + 1e-12 and -1 <= d.attraction_factor <= 1):
                worst = math.inf
    return worst, n


def check_decomposition_direct(rng, n=100):
    worst = 0.0
    for _ in range(n):
        da, db = (int(x) for x in rng.integers(2, 5, size=2))
        rho = random_density(product_space([da, db]), rng)
        for pi in _random_lattice(rng, da, db).prospects:
            worst = max(worst, abs(pr.prospect_probability(rho, pi).total - pr.prospect_trace(rho, pi)))
    return worst, n


def check_state_alternation(rng, n=100):
    worst = 0.0
    for _ in range(n):
        da, db = (int(x) for x in rng.integers(2, 5, size=2))
        rho = random_density(product_space([da, db]), rng)
        sa = qdt.attraction_from_state(rho, _random_lattice(rng, da, db))
        worst = max(worst, abs(sa.alternation_defect))
        if any(abs(x) > 1 for x in sa.q):
            worst = math.inf
    return worst, n


def check_theorem_diagonal(rng, n=100):
    worst = 0.0
    for _ in range(n):
        da, db = (int(x) for x in rng.integers(2, 5, size=2))
        w = rng.random(da * db)
        rho = DensityOperator(product_space([da, db]), np.diag(w / w.sum()).astype(complex))
        for pi in _random_lattice(rng, da, db).prospects:
            worst = max(worst, abs(pr.prospect_probability(rho, pi).attraction_factor))
    return worst, n


def check_theorem_separable(rng, n=100):
    worst = 0.0
    for _ in range(n):
        da, db = (int(x) for x in rng.integers(2, 5, size=2))
        rho = random_density(product_space([da, db]), rng)
        b = np.zeros(db, dtype=complex)
        b[int(rng.integers(0, db))] = np.exp(1j * rng.uniform(0, 2 * np.pi))
        pi = ev.Prospect(HilbertSpace(da), int(rng.integers(0, da)), ev.InconclusiveEvent.of(b))
        q = pr.prospect_probability(rho, pi).attraction_factor
        worst = max(worst, 0.0 if q == 0.0 else math.inf)
    return worst, n


# -- channels ---------------------------------------------------------------------

def check_pipeline_traces(rng, n=50):
    worst = 0.0
    for k in range(n):
        seed = int(rng.integers(0, 2**31))
        traj = ch.run_pipeline(ch.random_pipeline((2, 2, 2), seed), ch.random_initial_states((2, 2, 2), seed + 1))
        worst = max(worst, max(a.trace_defect for a in traj.audits))
    return worst, n


def check_pipeline_cuts(rng, n=50):
    worst = 0.0
    for k in range(n):
        seed = int(rng.integers(0, 2**31))
        traj = ch.run_pipeline(ch.random_pipeline((2, 2, 2), seed), ch.random_initial_states((2, 2, 2), seed + 1))
        dims = traj.dims
        worst = max(worst,
                    ch.product_cut_defect(traj.states[2].matrix, dims, [ch.FACTOR_B]),
                    ch.product_cut_defect(traj.states[4].matrix, dims, [ch.FACTOR_A]))
    return worst, n


def check_choi_psd(rng, n=50):
    worst = 0.0
    for k in range(n):
        p = ch.random_pipeline((2, 2, 2), int(rng.integers(0, 2**31)))
        for step in p.steps:
            lam = float(np.linalg.eigvalsh(ch.choi_state(step, p.dims).matrix)[0])
            worst = max(worst, -lam)
    return worst, n


def check_measurement_idempotent(rng, n=50):
    worst = 0.0
    for _ in range(n):
        rho = random_density(product_space([2, 2, 2]), rng)
        c = ch.measurement([int(rng.integers(0, 3))])
        once = ch.apply_channel(rho, c)
        worst = max(worst, float(np.linalg.norm(ch.apply_channel(once, c).matrix - once.matrix)))
    return worst, n


def check_pipeline_composite_consistency(rng, n=50):
    worst = 0.0
    for _ in range(n):
        seed = int(rng.integers(0, 2**31))
        traj = ch.run_pipeline(ch.random_pipeline((2, 2, 2), seed), ch.random_initial_states((2, 2, 2), seed + 1))
        for a in range(2):
            direct = pr.event_probability(traj.final, kron(kron(np.diag([1.0 - a, a]), np.eye(2)), np.eye(2)))
            composite = sum(ch.composite_joint_probability(traj, a, al) for al in range(2))
            worst = max(worst, abs(direct - composite))
    return worst, n


# -- qdt --------------------------------------------------------------------------

def check_prior_laws(rng, n=100):
    worst = 0.0
    for _ in range(n):
        size = int(rng.integers(2, 9))
        signs = list(rng.choice([-1, 1], size=size))
        if len(set(signs)) == 1:
            signs[0] = -signs[0]
        try:
            q = qdt.attraction_prior(size, signs)
        except Exception:
            continue
        worst = max(worst, abs(math.fsum(q)), abs(math.fsum(abs(x) for x in q) / size - 0.25))
    for signs in ([1, 1], [-1, -1, -1]):
        try:
            qdt.attraction_prior(len(signs), signs)
            worst = math.inf
        except Exception:
            pass
    return worst, n


def check_prediction_normalization(rng, n=100):
    worst = 0.0
    for _ in range(n):
        size = int(rng.integers(2, 6))
        f, g = rng.dirichlet(np.ones(size)), rng.dirichlet(np.ones(size))
        f[-1] = 1 - math.fsum(f[:-1])
        # p = (1 - t) f + t g stays a distribution, so q = t (g - f) is admissible
        q = rng.uniform(0, 1) * (g - f)
        q[-1] = -math.fsum(q[:-1])
        rep = qdt.combine([f"p{i}" for i in range(size)], list(f), list(q), mu=float(rng.uniform(0, 3)))
        worst = max(worst, abs(math.fsum(rep.p) - 1.0))
    return worst, n


def check_decay_limit(rng, n=100):
    worst = 0.0
    for _ in range(n):
        size = int(rng.integers(2, 6))
        f = list(rng.dirichlet(np.ones(size)))
        f[-1] = 1 - math.fsum(f[:-1])
        signs = [1] + [-1] * (size - 1)
        q = qdt.attraction_prior(size, signs)
        mu_c = float(rng.uniform(0.1, 5))
        qd = qdt.decay_attraction(q, 50 * mu_c, mu_c)
        p = [a + b for a, b in zip(f, qd)]
        if qdt.rank_descending(p) != qdt.rank_descending(f):
            worst = math.inf
        worst = max(worst, max(abs(x) for x in qd))
    return worst, n


def check_prisoner_dilemma(rng):
    rep = qdt.prisoner_dilemma_scenario().predict()
    worst = max(abs(rep.p[0] - 0.35), abs(rep.p[1] - 0.65), abs(rep.max_empirical_deviation - 0.02))
    if rep.ordering("f") == rep.ordering("p"):
        worst = math.inf
    return worst, 1


def check_reversal_threshold(rng):
    mu = qdt.preference_reversal_threshold((0.6, 0.4), (-0.25, 0.25), 1.0)
    return abs(mu - math.log(2.5)), 1


CHECKS: list[tuple[str, str, Callable, float]] = [
    ("numkernel", "kron associativity (integer entries)", check_kron_associative, 0.0),
    ("numkernel", "partial trace preserves trace", check_partial_trace_trace, 1e-10),
    ("numkernel", "partial trace of product = Tr(B) A", check_partial_trace_product, 1e-10),
    ("numkernel", "eigendecomposition reconstruction", check_eig_reconstruction, 1e-10),
    ("qstate", "pure density idempotent", check_pure_idempotent, 1e-10),
    ("qstate", "evolution preserves trace and spectrum", check_evolve_preserves, 1e-10),
    ("qstate", "dephasing idempotent and valid", check_dephase_idempotent, 1e-10),
    ("eventlogic", "join/meet lattice laws", check_lattice_laws, 1e-10),
    ("eventlogic", "spin-1/2 non-distributivity witness", check_non_distributive, 1e-12),
    ("eventlogic", "inconclusive event is not a union (1/separation)", check_inconclusive_not_union, 1e10),
    ("eventlogic", "prospect operator P^2 = <pi|pi> P", check_prospect_scaling, 1e-10),
    ("eventlogic", "degeneracy lifting sums to degenerate probability", check_lift_degeneracy, 1e-8),
    ("probability", "Lüders symmetry for rank-one events", check_luders_symmetry, 1e-12),
    ("probability", "Lüders commuting events give Kronecker delta", check_luders_commuting, 1e-12),
    ("probability", "Lüders asymmetry for degenerate events (1e-3/gap)", check_luders_degenerate_asymmetry, 1.0),
    ("probability", "Wigner = Lüders x marginal", check_wigner_relation, 1e-12),
    ("probability", "p = f + q (relative) and bounds", check_decomposition, 1e-14),
    ("probability", "decomposed total matches Tr(rho P(pi))", check_decomposition_direct, 1e-12),
    ("probability", "diagonal state gives q = 0", check_theorem_diagonal, 1e-12),
    ("probability", "single-amplitude prospect gives q = 0 exactly", check_theorem_separable, 0.0),
    ("channels", "pipeline steps preserve trace", check_pipeline_traces, 1e-12),
    ("channels", "post-measurement states are product across the cut", check_pipeline_cuts, 1e-10),
    ("channels", "channel dual states are PSD", check_choi_psd, 1e-10),
    ("channels", "measurement channels idempotent", check_measurement_idempotent, 1e-12),
    ("channels", "pipeline marginal matches composite joint probabilities", check_pipeline_composite_consistency, 1e-12),
    ("qdt", "lattice alternation after renormalization", check_state_alternation, 1e-12),
    ("qdt", "quarter-law prior: mean |q| = 1/4, sum q = 0", check_prior_laws, 1e-15),
    ("qdt", "prediction normalization", check_prediction_normalization, 1e-12),
    ("qdt", "large information recovers utility ordering", check_decay_limit, 1e-20),
    ("qdt", "prisoner dilemma reproduction", check_prisoner_dilemma, 1e-12),
    ("qdt", "preference reversal threshold", check_reversal_threshold, 1e-9),
]


def _run_one(index: int, module: str, name: str, fn: Callable, tolerance: float, seed: int) -> CheckResult:
    rng = np.random.default_rng([seed, index])
    start = time.perf_counter()
    try:
        worst, samples = fn(rng)
        worst = float(worst)
    except Exception:
        worst, samples = math.inf, 0
    elapsed = time.perf_counter() - start
    return CheckResult(name, module, bool(worst <= tolerance), worst, tolerance, samples, elapsed)


def run_verify(seed: int = 0, workers: int = 1) -> list[CheckResult]:
    """Run every check; results come back in declaration order regardless of ``workers``."""
    jobs = [(i, m, n, fn, tol, seed) for i, (m, n, fn, tol) in enumerate(CHECKS)]
    if workers <= 1:
        return [_run_one(*j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda j: _run_one(*j), jobs))
