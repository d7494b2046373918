import logging
import math
from dataclasses import dataclass
from typing import Tuple, Dict

import numpy as np

from .consts import MECHANISM_CDB, ABS_TOLERANCE
from .exception import NotSupportedError, PaymentError, InvalidOperationError
from .model import Instance, AuctionOutcome, MarketConfig, welfare_from_sums
from .util import float_less, float_tolerance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CdbTrace:
    """
    Greedy selection trace.

    :param sorted_bids: ``(id, bid)`` pairs in descending bid order, ties by ascending id
    :param prefix_welfares: welfare of each feasible prefix of *sorted_bids*, starting with the empty prefix
    :param stop_index: number of selected winners
    """
    sorted_bids: Tuple[Tuple[int, float], ...]
    prefix_welfares: Tuple[float, ...]
    stop_index: int

    @property
    def winners(self) -> Tuple[int, ...]:
        return tuple(mid for mid, _ in self.sorted_bids[:self.stop_index])

    def increments(self) -> np.ndarray:
        """Welfare gained by each successive bidder of the sorted order."""
        return np.diff(np.asarray(self.prefix_welfares, dtype=np.float64))

    def concavity_violation(self) -> float:
        """Largest rise between successive welfare increments, 0 when they never rise."""
        inc = self.increments()
        if len(inc) < 2:
            return 0.0
        return max(0.0, float(np.max(np.diff(inc))))


def _seats(cfg: MarketConfig) -> int:
    """Largest k with q*k <= D."""
    k = int(math.floor(cfg.D / cfg.q))
    if not float_less(cfg.D, cfg.q * (k + 1)):
        k += 1
    while k > 0 and float_less(cfg.D, cfg.q * k):
        k -= 1
    return k


def _prefix_welfares(bids_sorted: np.ndarray, cfg: MarketConfig) -> np.ndarray:
    """Welfare of every feasible prefix, index 0 being the empty set."""
    n = min(len(bids_sorted), _seats(cfg))
    ks = np.arange(1, n + 1, dtype=np.float64)
    welfares = welfare_from_sums(cfg.q * ks, cfg.q * np.cumsum(bids_sorted[:n]), cfg)
    return np.concatenate(([0.0], welfares))


def _stop_index(welfares: np.ndarray) -> int:
    """
    Applies the stop rule: stop before the first prefix whose welfare decreases or turns negative.
    """
    if len(welfares) < 2 or not float_less(0.0, welfares[1]):
        return 0
    stop = 1
    for k in range(2, len(welfares)):
        if welfares[k] < 0 or float_less(welfares[k], welfares[k - 1]):
            break
        stop = k
    return stop


def _check_instance(inst: Instance) -> None:
    if not inst.is_constant_demand():
        raise NotSupportedError('Constant-demand auction requires every demand to be q={}'.format(inst.config.q))


def _sort_order(inst: Instance) -> np.ndarray:
    return np.lexsort((inst.ids, -inst.b))


def cdb_select(inst: Instance) -> CdbTrace:
    """
    Greedy winner selection over bids in descending order.

    :param inst: a constant-demand instance
    :return: the selection trace
    :raises: :class:`chainmarket.exception.NotSupportedError` if any demand differs from q
    """
    _check_instance(inst)
    order = _sort_order(inst)
    welfares = _prefix_welfares(inst.b[order], inst.config)
    stop = _stop_index(welfares)
    logger.debug('cdb selection: %d of %d prefixes, stop at %d', len(welfares) - 1, len(inst), stop)
    trace = CdbTrace(
        sorted_bids=tuple((int(inst.ids[i]), float(inst.b[i])) for i in order),
        prefix_welfares=tuple(float(w) for w in welfares),
        stop_index=stop,
    )
    # increments along the descending order never rise
    scale = float(np.max(np.abs(welfares)))
    violation = trace.concavity_violation()
    if violation > float_tolerance(scale, scale):
        raise InvalidOperationError('Prefix welfare increments rise by {}'.format(violation))
    return trace


def _vcg_payment(i: int, pos: int, bids_sorted: np.ndarray, stop: int, winners_w: float,
                 cfg: MarketConfig) -> float:
    # welfare of re-running the selection without i
    others = np.delete(bids_sorted, pos)
    rerun = _prefix_welfares(others, cfg)
    rerun_stop = _stop_index(rerun)
    if rerun_stop == stop - 1:
        # the re-run seats exactly the other winners
        return 0.0
    with_others = float(rerun[rerun_stop])
    # welfare of the original winners without i
    if stop > 1:
        without_i = float(welfare_from_sums(cfg.q * (stop - 1), cfg.q * (winners_w - bids_sorted[pos]), cfg))
    else:
        without_i = 0.0
    payment = with_others - without_i
    if payment < 0:
        if payment > -ABS_TOLERANCE:
            logger.debug('clamping payment of miner %s: %g', i, payment)
            return 0.0
        raise PaymentError('Negative payment for miner "{}": {}'.format(i, payment))
    return payment


def run_cdb(inst: Instance) -> AuctionOutcome:
    """
    Runs the constant-demand auction.

    Winners are the prefix of the descending bid order chosen by :func:`cdb_select`. Each winner pays the
    welfare of re-running the selection without it, minus the welfare of the other winners.

    :param inst: a constant-demand instance
    :return: the auction outcome
    :raises: :class:`chainmarket.exception.NotSupportedError` if any demand differs from q
    :raises: :class:`chainmarket.exception.PaymentError`
    """
    _check_instance(inst)
    cfg = inst.config
    order = _sort_order(inst)
    bids_sorted = inst.b[order]
    welfares = _prefix_welfares(bids_sorted, cfg)
    stop = _stop_index(welfares)
    if stop == 0:
        return AuctionOutcome.empty(inst, MECHANISM_CDB)

    winners_w = float(bids_sorted[:stop].sum())
    payments: Dict[int, float] = {}
    for pos in range(stop):
        mid = int(inst.ids[order[pos]])
        payments[mid] = _vcg_payment(mid, pos, bids_sorted, stop, winners_w, cfg)
    return AuctionOutcome.build(inst, MECHANISM_CDB, [int(inst.ids[i]) for i in order[:stop]], payments)
