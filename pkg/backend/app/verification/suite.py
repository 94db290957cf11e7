#!/usr/bin/env python3
"""
Synthetic verification suite

Every seed yields one random game and one random monotone game with
d = 3 + seed % 6 players. The checks:

- oracle_equivalence: column j of the exact bivariate matrix equals the
  exact Shapley values of the game filtered on j
- efficiency: Shapley values sum to u(D) - u(empty)
- dummy_player: a player that never changes u gets a zero value and a
  zero row
- transitivity: the redundancy graph of a monotone game at gamma 1e-12 is
  transitive
- bounds: for every ordered triple of distinct players the three
  inequalities with the d!/2 factor hold on both the random and the
  monotone game

The same inequalities with factor 1/2 are counted as an observation.
"""

import logging
from math import factorial
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from backend.app.analytics.models import CheckResult, SuiteReport
from backend.app.core.enhanced_logging import create_component_logger
from backend.app.core.exceptions import InvalidConfig
from backend.app.core.subsets import masks_to_bits
from backend.app.graph.explanation_graph import build_graph, threshold, transitivity_violations
from backend.app.shapley.exact import exact_explain, exact_shapley
from backend.app.utility.games import CoalitionGame, enumerate_all, filter_game
from backend.app.utility.synthetic import synthetic

logger = logging.getLogger(__name__)
check_logger = create_component_logger("verification")

ORACLE_TOL = 1e-10
EFFICIENCY_TOL = 1e-10
DUMMY_TOL = 1e-12
TRANSITIVITY_GAMMA = 1e-12
BOUND_SLACK = 1e-12

CHECKS = ("oracle_equivalence", "efficiency", "dummy_player", "transitivity", "bounds")


def parse_seed_range(text: str) -> List[int]:
    """'a..b' (inclusive) or a single seed"""
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError as e:
        raise InvalidConfig("seed range must look like 'a..b'", {"value": text}) from e
    if lo < 0 or hi < lo:
        raise InvalidConfig("seed range must satisfy 0 <= a <= b", {"value": text})
    return list(range(lo, hi + 1))


def suite_dimension(seed: int) -> int:
    return 3 + seed % 6


def marginal_maxima(u: CoalitionGame) -> np.ndarray:
    """eps[i][j] = max over S containing j, not i, of |u(S + i) - u(S)|"""
    d = u.d
    table = enumerate_all(u)
    masks = np.arange(1 << d, dtype=np.int64)
    bits = masks_to_bits(masks, d)
    eps = np.zeros((d, d))
    for i in range(d):
        without = ~bits[:, i]
        delta = np.abs(table[masks[without] | (1 << i)] - table[masks[without]])
        for j in range(d):
            if j != i:
                eps[i, j] = delta[bits[without, j]].max()
    return eps


def bound_violations(m: np.ndarray, eps: np.ndarray, factor: float) -> List[Tuple[int, int, int]]:
    """Ordered triples (i, j, k) breaking any of the three bounds at the given factor"""
    d = m.shape[0]
    bad = []
    for i in range(d):
        for j in range(d):
            for k in range(d):
                if len({i, j, k}) < 3:
                    continue
                e_j, e_i = eps[i, j], eps[k, i]
                if (
                    abs(m[i, j]) > factor * e_j + BOUND_SLACK
                    or abs(m[k, i]) > factor * e_i + BOUND_SLACK
                    or abs(m[k, j]) > factor * (2 * e_j + e_i) + BOUND_SLACK
                ):
                    bad.append((i, j, k))
    return bad


def _dummy_game(seed: int, d: int) -> Tuple[CoalitionGame, int]:
    """Random game on d players whose last player never matters"""
    dummy = d - 1
    inner = np.random.default_rng(seed).random(1 << dummy)
    return CoalitionGame(d, lambda masks: inner[masks & ((1 << dummy) - 1)], name=f"dummy({seed})"), dummy


class _Tally:
    def __init__(self, name: str):
        self.result = CheckResult(name=name)

    def record(self, seed: int, ok: bool, detail: Optional[str] = None):
        if ok:
            self.result.passed += 1
            return
        self.result.failed += 1
        if self.result.first_failure_seed is None:
            self.result.first_failure_seed = seed
            self.result.detail = detail


def run_suite(seeds: Iterable[int], inject_fault: bool = False) -> SuiteReport:
    """Run every check on the games of the given seeds"""
    seeds = list(seeds)
    tallies: Dict[str, _Tally] = {name: _Tally(name) for name in CHECKS}
    observations = {"tight_bound_violations": 0, "transitivity_edges": 0}

    for n, seed in enumerate(seeds):
        d = suite_dimension(seed)

        u = synthetic("random", d, seed=seed)
        phi, matrix = exact_explain(u)
        m = matrix.m.copy()
        if inject_fault and n == 0:
            m[0, 1] += 1e-6
        worst = max(
            float(np.max(np.abs(m[:, j] - exact_shapley(filter_game(u, j)).phi))) for j in range(d)
        )
        tallies["oracle_equivalence"].record(seed, worst <= ORACLE_TOL, f"max deviation {worst:.3e} at d={d}")

        gap = abs(phi.phi.sum() - (u(u.full) - u(0)))
        tallies["efficiency"].record(seed, gap <= EFFICIENCY_TOL, f"efficiency gap {gap:.3e} at d={d}")

        dummy_game, dummy = _dummy_game(seed, d)
        dummy_phi, dummy_matrix = exact_explain(dummy_game)
        dummy_ok = abs(dummy_phi.phi[dummy]) <= DUMMY_TOL and np.all(
            np.abs(np.delete(dummy_matrix.m[dummy], dummy)) <= DUMMY_TOL
        )
        tallies["dummy_player"].record(seed, bool(dummy_ok), f"dummy player {dummy} has non-zero value at d={d}")

        monotone = synthetic("random_monotone", d, seed=seed)
        mono_matrix = exact_explain(monotone)[1].m
        h = threshold(build_graph(mono_matrix), TRANSITIVITY_GAMMA)
        observations["transitivity_edges"] += h.edge_count
        broken = transitivity_violations(h, limit=1)
        tallies["transitivity"].record(seed, not broken, f"triple {broken[0]} at d={d}" if broken else None)

        eps = marginal_maxima(monotone)
        loose = bound_violations(matrix.m, marginal_maxima(u), factorial(d) / 2)
        loose += bound_violations(mono_matrix, eps, factorial(d) / 2)
        tallies["bounds"].record(seed, not loose, f"triple {loose[0]} at d={d}" if loose else None)
        observations["tight_bound_violations"] += len(bound_violations(mono_matrix, eps, 0.5))

    report = SuiteReport(
        seeds=seeds,
        checks=[tallies[name].result for name in CHECKS],
        observations=observations,
        fault_injected=inject_fault,
    )
    for check in report.checks:
        check_logger.log_check(check.name, check.passed, check.failed, check.first_failure_seed)
    check_logger.info("Factor-1/2 bound observation", {"violations": observations["tight_bound_violations"]})
    return report
