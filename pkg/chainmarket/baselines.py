import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .consts import BRUTE_CHUNK, BRUTE_MAX_N, MECHANISM_FRLS, MECHANISM_BRUTE
from .exception import InstanceTooLargeError, InvalidParamError
from .model import Instance, AuctionOutcome, welfare_from_sums, set_welfare
from .util import float_less_array, float_tolerance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchParams:
    """
    Baseline search parameters.

    :param max_brute_n: largest instance the exhaustive oracle accepts
    :param ls_restarts: number of local search restarts, from the best feasible singletons
    :param ls_tolerance: relative improvement a local search move must exceed
    :raises: :class:`chainmarket.exception.InvalidParamError`
    """
    max_brute_n: int = 22
    ls_restarts: int = 3
    ls_tolerance: float = 1e-9

    def __post_init__(self):
        if not (0 <= self.max_brute_n <= BRUTE_MAX_N):
            raise InvalidParamError('max_brute_n must be in [0, {}]: {}'.format(BRUTE_MAX_N, self.max_brute_n))
        if self.ls_restarts < 1:
            raise InvalidParamError('ls_restarts must be at least 1: {}'.format(self.ls_restarts))
        if self.ls_tolerance < 0:
            raise InvalidParamError('ls_tolerance must be non-negative: {}'.format(self.ls_tolerance))


def _lex_best(candidates: List[Tuple[float, Tuple[int, ...]]]) -> Tuple[float, Tuple[int, ...]]:
    """Among values tied with the maximum, the lexicographically smallest id set."""
    top = max(v for v, _ in candidates)
    tol = float_tolerance(top, top)
    return min(((v, ids) for v, ids in candidates if v >= top - tol), key=lambda c: c[1])


def brute_force_opt(inst: Instance, params: SearchParams = SearchParams()) -> Tuple[Tuple[int, ...], float]:
    """
    Enumerates every subset and returns the feasible one with maximum welfare, ties broken by the
    lexicographically smallest sorted id tuple. The empty set is a candidate.

    :return: sorted winner ids and their welfare
    :raises: :class:`chainmarket.exception.InstanceTooLargeError`
    """
    n = len(inst)
    if n > params.max_brute_n:
        raise InstanceTooLargeError('Instance of {} miners exceeds the exhaustive limit of {}'.format(
            n, params.max_brute_n))
    if n == 0:
        return (), 0.0

    cfg = inst.config
    d = inst.d
    w = inst.d * inst.b
    bits = np.arange(n, dtype=np.int64)
    candidates: List[Tuple[float, Tuple[int, ...]]] = []
    for start in range(0, 1 << n, BRUTE_CHUNK):
        masks = np.arange(start, min(start + BRUTE_CHUNK, 1 << n), dtype=np.int64)
        member = ((masks[:, None] >> bits) & 1).astype(np.float64)
        total_d = member @ d
        welfare = welfare_from_sums(total_d, member @ w, cfg)
        welfare[float_less_array(cfg.D, total_d)] = -np.inf
        top = welfare.max()
        for idx in np.flatnonzero(welfare >= top - float_tolerance(top, top)):
            chosen = tuple(sorted(int(inst.ids[j]) for j in np.flatnonzero(member[idx])))
            candidates.append((float(set_welfare(chosen, inst)), chosen))

    value, best = _lex_best(candidates)
    return best, value


def _local_search(inst: Instance, start: int, params: SearchParams) -> Tuple[float, np.ndarray]:
    cfg = inst.config
    d = inst.d
    w = inst.d * inst.b
    shift = cfg.c * float(d.sum())
    member = np.zeros(len(inst), dtype=bool)
    member[start] = True

    def objective(total_d, total_w):
        # welfare plus c*sum(d), non-negative
        return welfare_from_sums(total_d, total_w, cfg) + shift

    while True:
        cur_d = float(d[member].sum())
        cur_w = float(w[member].sum())
        current = float(objective(cur_d, cur_w)) if cur_d > 0 else shift
        inside = np.flatnonzero(member)
        outside = np.flatnonzero(~member)

        best_value = -np.inf
        best_move: Tuple[int, int] = (-1, -1)
        if len(outside) > 0:
            add_d = cur_d + d[outside]
            add_v = np.where(float_less_array(cfg.D, add_d), -np.inf, objective(add_d, cur_w + w[outside]))
            k = int(np.argmax(add_v))
            if add_v[k] > best_value:
                best_value, best_move = float(add_v[k]), (-1, int(outside[k]))
        if len(inside) > 0:
            del_d = cur_d - d[inside]
            del_v = np.where(del_d <= 0, shift, objective(del_d, cur_w - w[inside]))
            k = int(np.argmax(del_v))
            if del_v[k] > best_value:
                best_value, best_move = float(del_v[k]), (int(inside[k]), -1)
        if len(inside) > 0 and len(outside) > 0:
            swap_d = cur_d - d[inside][:, None] + d[outside][None, :]
            swap_w = cur_w - w[inside][:, None] + w[outside][None, :]
            swap_v = np.where(float_less_array(cfg.D, swap_d), -np.inf, objective(swap_d, swap_w))
            k = int(np.argmax(swap_v))
            r, c = divmod(k, len(outside))
            if swap_v[r, c] > best_value:
                best_value, best_move = float(swap_v[r, c]), (int(inside[r]), int(outside[c]))

        if not best_value - current > params.ls_tolerance * max(abs(current), 1e-12):
            return current - shift, member
        out_pos, in_pos = best_move
        if out_pos >= 0:
            member[out_pos] = False
        if in_pos >= 0:
            member[in_pos] = True


def local_search_opt(inst: Instance, params: SearchParams = SearchParams()) -> Tuple[int, ...]:
    """
    Hill climbing over add, delete and swap moves on the welfare shifted by ``c*sum(d)`` under the
    supply constraint. Each restart begins at one of the best feasible singletons; the best local
    optimum wins, ties going to the lexicographically smallest id set.

    :return: sorted winner ids
    """
    cfg = inst.config
    feasible = np.flatnonzero(~float_less_array(cfg.D, inst.d))
    if len(feasible) == 0:
        return ()
    singles = welfare_from_sums(inst.d[feasible], inst.d[feasible] * inst.b[feasible], cfg)
    order = np.lexsort((inst.ids[feasible], -singles))
    starts = feasible[order[:params.ls_restarts]]

    results: List[Tuple[float, Tuple[int, ...]]] = []
    for start in starts:
        _, member = _local_search(inst, int(start), params)
        chosen = tuple(sorted(int(i) for i in inst.ids[member]))
        results.append((set_welfare(chosen, inst), chosen))
        logger.debug('local search from miner %s: %d winners, welfare %g',
                     inst.ids[start], len(chosen), results[-1][0])
    return _lex_best(results)[1]


def run_frls(inst: Instance, params: SearchParams = SearchParams()) -> AuctionOutcome:
    """
    Local search baseline auction: winners from :func:`local_search_opt`, each paying its bid.
    """
    winners = local_search_opt(inst, params)
    return AuctionOutcome.build(inst, MECHANISM_FRLS, winners,
                                {i: float(inst.b[inst.index_of(i)]) for i in winners})


def run_brute(inst: Instance, params: SearchParams = SearchParams()) -> AuctionOutcome:
    """
    Welfare-optimal allocation from :func:`brute_force_opt`, each winner paying its bid.

    :raises: :class:`chainmarket.exception.InstanceTooLargeError`
    """
    winners, _ = brute_force_opt(inst, params)
    return AuctionOutcome.build(inst, MECHANISM_BRUTE, winners,
                                {i: float(inst.b[inst.index_of(i)]) for i in winners})
