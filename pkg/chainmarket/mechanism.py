import math
from typing import Dict, Mapping, Optional, Sequence

from .baselines import SearchParams, run_frls, run_brute
from .cdb import run_cdb
from .consts import MECHANISM_CDB, MECHANISM_MDB, MECHANISM_FRLS, MECHANISM_BRUTE, MODE_CONSTANT, MODE_MULTI
from .exception import NotFoundError, InvalidParamError
from .mdb import mdb_select, critical_bids, run_mdb
from .model import Instance, AuctionOutcome, coefficient
from .types import TMechanism, TDemandMode


class Mechanism:
    """
    Base class for auction mechanisms.

    :param name: the mechanism name
    """
    name: TMechanism

    def __init__(self, name: TMechanism):
        self.name = name

    def run(self, instance: Instance) -> AuctionOutcome:
        """
        Runs one auction.

        :param instance: the auctioned instance
        :return: the auction outcome
        """
        raise NotImplementedError()

    def demand_modes(self) -> Sequence[TDemandMode]:
        """
        Returns the demand modes the mechanism accepts.
        """
        return [MODE_CONSTANT, MODE_MULTI]

    def is_truthful(self) -> bool:
        """
        Whether the mechanism claims truthfulness and individual rationality, and so can be probed.
        """
        return False

    def is_truthful_with_externalities(self) -> bool:
        """
        Whether truthfulness also covers misreports that change which other miners win. When False, only
        misreports that leave the other winners in place are bound to gain nothing.
        """
        return False

    def critical_bids(self, outcome: AuctionOutcome) -> Mapping[int, float]:
        """
        Critical bid of each winner, if the mechanism prices by critical bids.
        """
        return {}

    def rationality_margin(self, outcome: AuctionOutcome) -> float:
        """
        Smallest winner margin of an outcome, ``+inf`` without winners. A payment by a loser or a negative
        payment gives ``-inf``.
        """
        for mid, pay in outcome.p.items():
            if pay < 0 or (pay != 0 and not outcome.is_winner(mid)):
                return -math.inf
        margins = [outcome.utility(w) for w in outcome.winners]
        return min(margins) if margins else math.inf


class Mechanism_CDB(Mechanism):
    """
    Constant-demand auction with VCG-style payments. Its margin is the winner utility.
    """
    def __init__(self):
        super().__init__(MECHANISM_CDB)

    def run(self, instance: Instance) -> AuctionOutcome:
        return run_cdb(instance)

    def demand_modes(self) -> Sequence[TDemandMode]:
        return [MODE_CONSTANT]

    def is_truthful(self) -> bool:
        return True

    def is_truthful_with_externalities(self) -> bool:
        return True


class Mechanism_MDB(Mechanism):
    """
    Multi-demand auction with critical payments. Its margin is the bid minus the critical bid, where the
    critical bid is taken both from the price list and from the charged payment.

    An overbidding winner can push a trailing competitor below zero density; the smaller allocation raises
    the winner's own value by more than its payment, so such misreports are not bound to gain nothing.
    """
    def __init__(self):
        super().__init__(MECHANISM_MDB)

    def run(self, instance: Instance) -> AuctionOutcome:
        return run_mdb(instance)

    def is_truthful(self) -> bool:
        return True

    def critical_bids(self, outcome: AuctionOutcome) -> Mapping[int, float]:
        if not outcome.winners:
            return {}
        return critical_bids(outcome.instance, mdb_select(outcome.instance).steps)

    def rationality_margin(self, outcome: AuctionOutcome) -> float:
        base = super().rationality_margin(outcome)
        if not outcome.winners or base == -math.inf:
            return base
        inst = outcome.instance
        cfg = inst.config
        coef = coefficient(outcome.allocated, cfg)
        bids = self.critical_bids(outcome)
        margin = math.inf
        for w in outcome.winners:
            b = float(inst.b[inst.index_of(w)])
            charged = outcome.payment(w) * cfg.D / coef
            margin = min(margin, b - bids.get(w, math.inf), b - charged)
        return margin


class Mechanism_FRLS(Mechanism):
    """
    Local search baseline, pay as bid.
    """
    params: SearchParams

    def __init__(self, params: Optional[SearchParams] = None):
        super().__init__(MECHANISM_FRLS)
        self.params = params if params is not None else SearchParams()

    def run(self, instance: Instance) -> AuctionOutcome:
        return run_frls(instance, self.params)


class Mechanism_Brute(Mechanism):
    """
    Exhaustive welfare optimum, pay as bid.
    """
    params: SearchParams

    def __init__(self, params: Optional[SearchParams] = None):
        super().__init__(MECHANISM_BRUTE)
        self.params = params if params is not None else SearchParams()

    def run(self, instance: Instance) -> AuctionOutcome:
        return run_brute(instance, self.params)


class MechanismRegistry:
    """
    Mechanisms addressable by name.

    :param mechanisms: the initial mechanisms
    """
    _mechanisms: Dict[str, Mechanism]

    def __init__(self, mechanisms: Optional[Sequence[Mechanism]] = None):
        self._mechanisms = {}
        if mechanisms is not None:
            self.register(*mechanisms)

    def register(self, *mechanisms: Mechanism) -> 'MechanismRegistry':
        """
        Adds mechanisms, replacing any registered under the same name.

        :return: self
        """
        for m in mechanisms:
            self._mechanisms[m.name] = m
        return self

    def names(self) -> Sequence[TMechanism]:
        return [TMechanism(n) for n in self._mechanisms.keys()]

    def get(self, name: str) -> Mechanism:
        """
        Gets a mechanism by name.

        :raises: :class:`chainmarket.exception.NotFoundError`
        """
        if name not in self._mechanisms:
            raise NotFoundError('Unknown mechanism: "{}"'.format(name))
        return self._mechanisms[name]

    def probed(self, name: str) -> Mechanism:
        """
        Gets a mechanism that can be probed for truthfulness.

        :raises: :class:`chainmarket.exception.InvalidParamError`
        """
        mechanism = self.get(name)
        if not mechanism.is_truthful():
            raise InvalidParamError('Mechanism "{}" cannot be probed'.format(name))
        return mechanism


def default_registry(params: Optional[SearchParams] = None) -> MechanismRegistry:
    """
    A registry with every built-in mechanism.
    """
    return MechanismRegistry([Mechanism_CDB(), Mechanism_MDB(), Mechanism_FRLS(params), Mechanism_Brute(params)])
