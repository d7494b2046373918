import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Dict

import numpy as np

from .consts import MECHANISM_MDB
from .exception import NotSupportedError, InvalidOperationError, PricingError
from .model import Instance, AuctionOutcome, MarketConfig, coefficient, density_from_sums, set_sums
from .util import float_less, float_tolerance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MdbStep:
    """
    One greedy step: the density maximizer over the remaining miners and the base it was evaluated on.

    :param index: candidate position in the instance
    :param miner_id: candidate id
    :param density: candidate marginal density against the base
    :param base_demand: total demand of the winners selected before this step
    :param base_weighted_bid: ``sum(d*b)`` of the winners selected before this step
    :param accepted: whether the candidate was selected; a rejected step ends the selection
    """
    index: int
    miner_id: int
    density: float
    base_demand: float
    base_weighted_bid: float
    accepted: bool


@dataclass(frozen=True)
class MdbTrace:
    """
    Greedy selection trace. Holds every accepted step plus the rejected candidate that stopped the
    selection, if any.
    """
    steps: Tuple[MdbStep, ...]

    @property
    def accepted(self) -> Tuple[MdbStep, ...]:
        return tuple(s for s in self.steps if s.accepted)

    @property
    def winners(self) -> Tuple[int, ...]:
        return tuple(s.miner_id for s in self.steps if s.accepted)


@dataclass(frozen=True)
class PriceEntry:
    """
    A position of the price list.

    :param position: 1-based position k in the selection without the priced winner
    :param competitor_id: the competitor selected at position k
    :param target: density the priced winner must match, the competitor's density against the base before k
    :param critical_bid: bid at which the priced winner matches *target* on that base
    """
    position: int
    competitor_id: int
    target: float
    critical_bid: float


@dataclass(frozen=True)
class PriceList:
    """
    Price list of a winner.

    :param entries: retained positions, in selection order
    :param tail_target: virtual density after the retained positions
    :param tail_bid: bid matching *tail_target* on the base of all retained positions
    :param L_p: number of retained positions
    """
    entries: Tuple[PriceEntry, ...]
    tail_target: float
    tail_bid: float
    L_p: int

    @property
    def critical_bid(self) -> float:
        """The minimum over all positions and the tail."""
        return min([e.critical_bid for e in self.entries] + [self.tail_bid])


def _check_instance(inst: Instance) -> None:
    if len(inst) > 0 and not np.all(inst.d > 0):
        raise NotSupportedError('Multi-demand auction requires positive demands')


def _argmax_lowest_id(dens: np.ndarray, ids: np.ndarray) -> int:
    best = int(np.argmax(dens))
    top = float(dens[best])
    if not math.isfinite(top):
        return best
    near = np.flatnonzero(dens >= top - float_tolerance(top, top))
    if len(near) > 1:
        best = int(near[np.argmin(ids[near])])
    return best


def _greedy(inst: Instance, excluded: Optional[int] = None,
            prefix: Sequence[MdbStep] = ()) -> List[MdbStep]:
    """
    Greedy selection. Densities are always evaluated on the full miner vector with unavailable miners
    masked, so a run without one miner reproduces the shared steps bit for bit.

    :param excluded: position of a miner left out of the run
    :param prefix: accepted steps known to open the run
    """
    cfg = inst.config
    d, b, ids = inst.d, inst.b, inst.ids
    available = np.ones(len(inst), dtype=bool)
    if excluded is not None:
        available[excluded] = False
    steps: List[MdbStep] = []
    base_d = 0.0
    base_w = 0.0
    for step in prefix:
        steps.append(step)
        available[step.index] = False
        base_d += float(d[step.index])
        base_w += float(d[step.index] * b[step.index])

    while available.any():
        dens = density_from_sums(d, b, base_d, base_w, cfg)
        dens = np.where(available, dens, -np.inf)
        best = _argmax_lowest_id(dens, ids)
        density = float(dens[best])
        fits = not float_less(cfg.D, base_d + float(d[best]))
        accepted = fits and not density < 0
        steps.append(MdbStep(index=best, miner_id=int(ids[best]), density=density,
                             base_demand=base_d, base_weighted_bid=base_w, accepted=accepted))
        if not accepted:
            break
        available[best] = False
        base_d += float(d[best])
        base_w += float(d[best] * b[best])
    return steps


def mdb_select(inst: Instance) -> MdbTrace:
    """
    Greedy winner selection by maximum marginal density. Ties go to the lowest id. The selection stops
    at the first candidate that overflows the supply or has a negative density.

    :raises: :class:`chainmarket.exception.NotSupportedError` on non-positive demands
    """
    _check_instance(inst)
    return MdbTrace(steps=tuple(_greedy(inst)))


def _invert(target: float, d_i: float, base_d: float, base_w: float, cfg: MarketConfig, miner_id: int) -> float:
    coef = coefficient(base_d + d_i, cfg)
    if coef <= 0:
        raise PricingError('Cannot price miner "{}": network effects coefficient {} is not positive'.format(
            miner_id, coef))
    externality = cfg.a2 * (math.exp(cfg.a3 * base_d / cfg.D) - math.exp(cfg.a3 * (base_d + d_i) / cfg.D)) * \
        base_w / (cfg.D * d_i)
    bid = (target - externality + cfg.c) * cfg.D / coef
    if bid < 0:
        logger.warning('clamping negative critical bid of miner %s: %g', miner_id, bid)
        return 0.0
    return bid


def invert_density(target: float, i: int, base: Iterable[int], inst: Instance) -> float:
    """
    Bid of miner *i* at which its marginal density against *base* equals *target*.
    The density is affine and increasing in the bid, so the solution is unique. Negative solutions are
    clamped to 0.

    :raises: :class:`chainmarket.exception.InvalidOperationError` if *i* is in *base*
    :raises: :class:`chainmarket.exception.PricingError` if the network effects coefficient is not positive
    """
    members = list(base)
    if i in members:
        raise InvalidOperationError('Miner "{}" is already in the base set'.format(i))
    pos = inst.index_of(i)
    base_d, base_w = set_sums(members, inst)
    return _invert(target, float(inst.d[pos]), base_d, base_w, inst.config, i)


def _price_list(inst: Instance, pos: int, prefix: Sequence[MdbStep] = ()) -> PriceList:
    cfg = inst.config
    d_i = float(inst.d[pos])
    miner_id = int(inst.ids[pos])
    steps = _greedy(inst, excluded=pos, prefix=prefix)
    accepted = [s for s in steps if s.accepted]

    # retained positions keep room for the priced winner
    limit = cfg.D - d_i
    L_p = 0
    cumulative = 0.0
    for s in accepted:
        cumulative += float(inst.d[s.index])
        if float_less(limit, cumulative):
            break
        L_p += 1

    entries = tuple(
        PriceEntry(position=k + 1, competitor_id=s.miner_id, target=s.density,
                   critical_bid=_invert(s.density, d_i, s.base_demand, s.base_weighted_bid, cfg, miner_id))
        for k, s in enumerate(accepted[:L_p])
    )

    if L_p < len(accepted):
        tail_base_d, tail_base_w = accepted[L_p].base_demand, accepted[L_p].base_weighted_bid
    elif steps and not steps[-1].accepted:
        tail_base_d, tail_base_w = steps[-1].base_demand, steps[-1].base_weighted_bid
    else:
        tail_base_d = sum(float(inst.d[s.index]) for s in accepted)
        tail_base_w = sum(float(inst.d[s.index] * inst.b[s.index]) for s in accepted)

    tail_target = 0.0
    if L_p < len(steps):
        candidate = steps[L_p]
        if candidate.density >= 0 and not float_less(d_i, float(inst.d[candidate.index])):
            tail_target = candidate.density
    tail_bid = _invert(tail_target, d_i, tail_base_d, tail_base_w, cfg, miner_id)
    return PriceList(entries=entries, tail_target=tail_target, tail_bid=tail_bid, L_p=L_p)


def price_list(inst: Instance, i: int, main_winners: Iterable[int]) -> PriceList:
    """
    Re-runs the selection without winner *i* and builds its price list.

    :raises: :class:`chainmarket.exception.InvalidOperationError` if *i* is not a winner
    """
    _check_instance(inst)
    if i not in set(main_winners):
        raise InvalidOperationError('Miner "{}" is not a winner'.format(i))
    return _price_list(inst, inst.index_of(i))


def critical_bid(inst: Instance, i: int, main_winners: Iterable[int]) -> float:
    """
    Smallest bid with which winner *i* would still win: the minimum of its price list.

    :raises: :class:`chainmarket.exception.InvalidOperationError` if *i* is not a winner
    """
    return price_list(inst, i, main_winners).critical_bid


def critical_bids(inst: Instance, steps: Sequence[MdbStep]) -> Dict[int, float]:
    """
    Critical bid of every accepted step of a main run, reusing the steps shared with each re-run.
    """
    accepted = [s for s in steps if s.accepted]
    return {s.miner_id: _price_list(inst, s.index, prefix=accepted[:k]).critical_bid
            for k, s in enumerate(accepted)}


def run_mdb(inst: Instance) -> AuctionOutcome:
    """
    Runs the multi-demand auction.

    Each winner pays ``coef(sum(d of winners)) * b' / D`` where ``b'`` is its critical bid.

    :raises: :class:`chainmarket.exception.NotSupportedError` on non-positive demands
    :raises: :class:`chainmarket.exception.PricingError`
    """
    trace = mdb_select(inst)
    accepted = trace.accepted
    if not accepted:
        return AuctionOutcome.empty(inst, MECHANISM_MDB)

    cfg = inst.config
    total_d, _ = set_sums(trace.winners, inst)
    coef = coefficient(total_d, cfg)
    payments = {mid: coef * bid / cfg.D for mid, bid in critical_bids(inst, trace.steps).items()}
    logger.debug('mdb: %d winners of %d, allocated %g', len(accepted), len(inst), total_d)
    return AuctionOutcome.build(inst, MECHANISM_MDB, trace.winners, payments)
