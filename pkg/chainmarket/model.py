import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .consts import DEFAULT_T, DEFAULT_R, DEFAULT_LAMBDA, DEFAULT_XI, DEFAULT_C, DEFAULT_D, DEFAULT_A1, \
    DEFAULT_A2, DEFAULT_A3, DEFAULT_Q, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_S_MAX
from .exception import ConfigError, InvalidParamError, NotFoundError, InvalidOperationError, PaymentError
from .merger import merge_overrides
from .options import MarketOptions, OptionGetter
from .types import TMechanism
from .util import float_less

logger = logging.getLogger(__name__)

Allocation = Mapping[int, int]
"""Allocation flags by miner id, 1 for winners and 0 (or absent) for losers."""

ArrayLike = Union[float, np.ndarray]

CONFIG_KEYS: Mapping[str, str] = {
    'T': 'T', 'r': 'r', 'lambda': 'lam', 'xi': 'xi', 'c': 'c', 'D': 'D',
    'a1': 'a1', 'a2': 'a2', 'a3': 'a3', 'q': 'q', 'beta1': 'beta1', 'beta2': 'beta2', 's_max': 's_max',
}
"""Configuration key to :class:`MarketConfig` attribute."""


@dataclass(frozen=True)
class MarketConfig:
    """
    Protocol and market constants. Validated on construction.

    The configuration key of the block time is ``lambda``, stored in the :attr:`lam` attribute.

    :raises: :class:`chainmarket.exception.ConfigError`
    """
    T: float = DEFAULT_T
    r: float = DEFAULT_R
    lam: float = DEFAULT_LAMBDA
    xi: float = DEFAULT_XI
    c: float = DEFAULT_C
    D: float = DEFAULT_D
    a1: float = DEFAULT_A1
    a2: float = DEFAULT_A2
    a3: float = DEFAULT_A3
    q: float = DEFAULT_Q
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    s_max: float = DEFAULT_S_MAX

    def __post_init__(self):
        for key, attr in CONFIG_KEYS.items():
            value = getattr(self, attr)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError('Config value "{}" must be a number: {}'.format(key, repr(value)))
            if not math.isfinite(value):
                raise ConfigError('Config value "{}" must be finite: {}'.format(key, value))
            object.__setattr__(self, attr, float(value))
        self._validate()

    def _validate(self) -> None:
        def check(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError('Invalid config: {}'.format(msg))

        check(self.T >= 0, 'T >= 0')
        check(self.r >= 0, 'r >= 0')
        check(self.lam > 0, 'lambda > 0')
        check(self.xi >= 0, 'xi >= 0')
        check(self.c >= 0, 'c >= 0')
        check(self.D > 0, 'D > 0')
        check(self.a1 > 0 and self.a2 > 0 and self.a3 > 0, 'a1, a2, a3 > 0')
        check(0 < self.q < self.D, '0 < q < D')
        # beta1 == beta2 is a zero-dispersion market
        check(0 <= self.beta1 <= self.beta2 < 1, '0 <= beta1 <= beta2 < 1')
        check(self.s_max > 0, 's_max > 0')
        check(self.a1 >= self.a2 * math.exp(self.a3), 'a1 >= a2*exp(a3)')

    def replace(self, **changes: Any) -> 'MarketConfig':
        """
        Returns a copy with some attributes changed.

        :raises: :class:`chainmarket.exception.ConfigError`
        """
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, float]:
        """
        The configuration as a flat mapping of configuration keys.
        """
        return {key: getattr(self, attr) for key, attr in CONFIG_KEYS.items()}

    @classmethod
    def from_options(cls, options: OptionGetter) -> 'MarketConfig':
        """
        Builds a configuration from :class:`chainmarket.options.MarketOptions`.

        :raises: :class:`chainmarket.exception.OptionError`
        :raises: :class:`chainmarket.exception.TypeError`
        :raises: :class:`chainmarket.exception.ConfigError`
        """
        return cls(**{attr: options.option_get(key) for key, attr in CONFIG_KEYS.items()})

    @classmethod
    def from_dict(cls, values: Optional[Mapping[str, Any]] = None) -> 'MarketConfig':
        """
        Builds a configuration from a mapping of configuration keys. Missing keys use defaults.

        :raises: :class:`chainmarket.exception.OptionError` on unknown keys
        """
        return cls.from_options(MarketOptions(dict(values) if values is not None else None))

    def with_overrides(self, overrides: Mapping[str, Any]) -> 'MarketConfig':
        """
        Returns a copy with *overrides* merged in. Only known keys are accepted, string values are
        converted to :class:`float`.

        :raises: :class:`chainmarket.exception.OptionError`
        :raises: :class:`chainmarket.exception.ConfigError`
        """
        converted: Dict[str, Any] = {}
        for key, value in overrides.items():
            if isinstance(value, bool):
                raise ConfigError('Config value "{}" must be a number: {}'.format(key, repr(value)))
            try:
                converted[key] = float(value)
            except (ValueError, TypeError) as e:
                raise ConfigError('Config value "{}" must be a number: {}'.format(key, repr(value))) from e
        return MarketConfig.from_dict(merge_overrides(self.to_dict(), converted))


@dataclass(frozen=True)
class Miner:
    """
    A single-minded bidder.

    :param id: miner identifier
    :param s: block size (data units)
    :param d: demand (resource units)
    :param b: bid (tokens)
    :raises: :class:`chainmarket.exception.InvalidParamError`
    """
    id: int
    s: float
    d: float
    b: float

    def __post_init__(self):
        if not (self.s > 0):
            raise InvalidParamError('Miner "{}": block size must be positive: {}'.format(self.id, self.s))
        if not (self.d > 0):
            raise InvalidParamError('Miner "{}": demand must be positive: {}'.format(self.id, self.d))
        if not (self.b >= 0):
            raise InvalidParamError('Miner "{}": bid must be non-negative: {}'.format(self.id, self.b))
        if not all(math.isfinite(v) for v in (self.s, self.d, self.b)):
            raise InvalidParamError('Miner "{}": values must be finite'.format(self.id))

    def with_bid(self, b: float) -> 'Miner':
        return dataclasses.replace(self, b=b)


@dataclass(frozen=True)
class Instance:
    """
    One auction: a configuration plus the miners in canonical order.

    Numpy views of the miner attributes are available as :attr:`ids`, :attr:`s`, :attr:`d`, :attr:`b`.

    :raises: :class:`chainmarket.exception.InvalidParamError` on duplicated ids
    """
    config: MarketConfig
    miners: Tuple[Miner, ...]
    ids: np.ndarray = field(init=False, repr=False, compare=False)
    s: np.ndarray = field(init=False, repr=False, compare=False)
    d: np.ndarray = field(init=False, repr=False, compare=False)
    b: np.ndarray = field(init=False, repr=False, compare=False)
    _index: Dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        miners = tuple(self.miners)
        object.__setattr__(self, 'miners', miners)
        index = {m.id: i for i, m in enumerate(miners)}
        if len(index) != len(miners):
            raise InvalidParamError('Miner ids must be unique')
        object.__setattr__(self, '_index', index)
        object.__setattr__(self, 'ids', np.array([m.id for m in miners], dtype=np.int64))
        for attr in ('s', 'd', 'b'):
            arr = np.array([getattr(m, attr) for m in miners], dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        self.ids.setflags(write=False)

    def __len__(self) -> int:
        return len(self.miners)

    def index_of(self, miner_id: int) -> int:
        """
        Position of a miner in the canonical order.

        :raises: :class:`chainmarket.exception.NotFoundError`
        """
        try:
            return self._index[miner_id]
        except KeyError:
            raise NotFoundError('Unknown miner id: "{}"'.format(miner_id)) from None

    def indexes_of(self, miner_ids: Iterable[int]) -> np.ndarray:
        return np.array([self.index_of(i) for i in miner_ids], dtype=np.int64)

    def miner(self, miner_id: int) -> Miner:
        return self.miners[self.index_of(miner_id)]

    def replace_miner(self, miner: Miner) -> 'Instance':
        """
        Returns a copy with the miner of the same id replaced.

        :raises: :class:`chainmarket.exception.NotFoundError`
        """
        pos = self.index_of(miner.id)
        return Instance(self.config, self.miners[:pos] + (miner,) + self.miners[pos + 1:])

    def is_constant_demand(self) -> bool:
        """Whether every miner demands exactly q."""
        return bool(np.all(self.d == self.config.q))


#
# Formulas
#

def coefficient(total_demand: ArrayLike, cfg: MarketConfig) -> ArrayLike:
    """
    Network effects coefficient ``a1 - a2*exp(a3*d/D)`` at a total allocated demand.
    """
    if isinstance(total_demand, np.ndarray):
        return cfg.a1 - cfg.a2 * np.exp(cfg.a3 * total_demand / cfg.D)
    return cfg.a1 - cfg.a2 * math.exp(cfg.a3 * total_demand / cfg.D)


def welfare_from_sums(total_demand: ArrayLike, total_weighted_bid: ArrayLike, cfg: MarketConfig) -> ArrayLike:
    """
    Social welfare of any miner set from its sums ``sum(d)`` and ``sum(d*b)``.
    """
    return coefficient(total_demand, cfg) * total_weighted_bid / cfg.D - cfg.c * total_demand


def density_from_sums(d: ArrayLike, b: ArrayLike, base_demand: float, base_weighted_bid: float,
                      cfg: MarketConfig) -> ArrayLike:
    """
    Marginal welfare density of candidates (*d*, *b*) against a base set given by its sums.
    The result is the sum of a non-positive externality term and the candidate's own term.
    """
    e0 = math.exp(cfg.a3 * base_demand / cfg.D)
    e1 = np.exp(cfg.a3 * (base_demand + d) / cfg.D)
    externality = cfg.a2 * (e0 - e1) * base_weighted_bid / (cfg.D * d)
    own = (cfg.a1 - cfg.a2 * e1) * b / cfg.D - cfg.c
    return externality + own


def truthful_bid(s: float, d: float, cfg: MarketConfig) -> float:
    """
    Ex-ante valuation ``(T + r*s)*exp(-xi*s/lambda)*d``, which is the truthful bid.

    :raises: :class:`chainmarket.exception.InvalidParamError`
    """
    if s < 0 or d < 0:
        raise InvalidParamError('Block size and demand must be non-negative: {}, {}'.format(s, d))
    return (cfg.T + cfg.r * s) * math.exp(-cfg.xi * s / cfg.lam) * d


def truthful_bids(s: np.ndarray, d: np.ndarray, cfg: MarketConfig) -> np.ndarray:
    """Vectorized :func:`truthful_bid`."""
    return (cfg.T + cfg.r * s) * np.exp(-cfg.xi * s / cfg.lam) * d


def network_effects(pi: float, cfg: MarketConfig) -> float:
    """
    Value multiplier ``a1*pi - a2*pi*exp(a3*pi)`` of the invested computing power share *pi*.

    :raises: :class:`chainmarket.exception.InvalidParamError` if pi is outside [0, 1]
    """
    if not (0 <= pi <= 1):
        raise InvalidParamError('Power share must be in [0, 1]: {}'.format(pi))
    return cfg.a1 * pi - cfg.a2 * pi * math.exp(cfg.a3 * pi)


def orphan_probability(s: float, cfg: MarketConfig) -> float:
    """
    Probability that a block of size *s* is orphaned, with propagation delay ``xi*s``.
    """
    if s < 0:
        raise InvalidParamError('Block size must be non-negative: {}'.format(s))
    return 1.0 - math.exp(-cfg.xi * s / cfg.lam)


def reward_probability(gamma: float, s: float, cfg: MarketConfig) -> float:
    """
    Probability of mining a block and having it accepted: ``gamma*exp(-xi*s/lambda)``.

    :raises: :class:`chainmarket.exception.InvalidParamError`
    """
    if not (0 <= gamma <= 1):
        raise InvalidParamError('Hash power must be in [0, 1]: {}'.format(gamma))
    return gamma * (1.0 - orphan_probability(s, cfg))


def token_reward(s: float, gamma: float, cfg: MarketConfig) -> float:
    """
    Expected token reward ``(T + r*s)`` times :func:`reward_probability`.
    """
    return (cfg.T + cfg.r * s) * reward_probability(gamma, s, cfg)


def allocated_demand(inst: Instance, x: Allocation) -> float:
    """Total demand of the miners flagged in *x*."""
    return float(sum(inst.d[inst.index_of(i)] for i, flag in x.items() if flag))


def hash_power(i: int, inst: Instance, x: Allocation) -> float:
    """
    Share of the allocated resources held by miner *i*; 0 for losers and for an empty market.

    :raises: :class:`chainmarket.exception.NotFoundError`
    """
    pos = inst.index_of(i)
    if not x.get(i, 0):
        return 0.0
    total = allocated_demand(inst, x)
    if total <= 0:
        return 0.0
    return float(inst.d[pos]) / total


def ex_post_valuation(i: int, inst: Instance, x: Allocation) -> float:
    """
    Realized value of miner *i* under allocation *x*, computed from its true block size and demand.

    :raises: :class:`chainmarket.exception.NotFoundError`
    """
    pos = inst.index_of(i)
    if not x.get(i, 0):
        return 0.0
    cfg = inst.config
    d, s = float(inst.d[pos]), float(inst.s[pos])
    return (d * d / cfg.D) * coefficient(allocated_demand(inst, x), cfg) * \
        (cfg.T + cfg.r * s) * math.exp(-cfg.xi * s / cfg.lam)


def set_sums(M: Iterable[int], inst: Instance) -> Tuple[float, float]:
    """
    Returns ``(sum(d), sum(d*b))`` of a set of miner ids.

    :raises: :class:`chainmarket.exception.NotFoundError`
    """
    idx = inst.indexes_of(M)
    if len(idx) == 0:
        return 0.0, 0.0
    return float(inst.d[idx].sum()), float((inst.d[idx] * inst.b[idx]).sum())


def set_welfare(M: Iterable[int], inst: Instance) -> float:
    """
    Social welfare of the miner set *M* at the submitted bids. Defined for infeasible sets as well.

    :raises: :class:`chainmarket.exception.NotFoundError`
    """
    total_d, total_w = set_sums(M, inst)
    if total_d == 0:
        return 0.0
    return float(welfare_from_sums(total_d, total_w, inst.config))


def marginal_density(i: int, M: Iterable[int], inst: Instance) -> float:
    """
    Welfare increment per resource unit of adding miner *i* to *M*.

    :raises: :class:`chainmarket.exception.InvalidOperationError` if *i* is in *M*
    :raises: :class:`chainmarket.exception.NotFoundError`
    """
    members = list(M)
    if i in members:
        raise InvalidOperationError('Miner "{}" is already in the base set'.format(i))
    pos = inst.index_of(i)
    base_d, base_w = set_sums(members, inst)
    return float(density_from_sums(float(inst.d[pos]), float(inst.b[pos]), base_d, base_w, inst.config))


@dataclass(frozen=True)
class AuctionOutcome:
    """
    Result of one auction.

    :param instance: the auctioned instance
    :param mechanism: name of the mechanism that produced the outcome
    :param winners: winner ids in selection order
    :param payments: payment of each winner
    :param welfare: social welfare of the winner set
    :param allocated: total demand of the winner set
    """
    instance: Instance = field(repr=False, compare=False)
    mechanism: TMechanism
    winners: Tuple[int, ...]
    payments: Mapping[int, float]
    welfare: float
    allocated: float

    @classmethod
    def build(cls, instance: Instance, mechanism: TMechanism, winners: Sequence[int],
              payments: Mapping[int, float]) -> 'AuctionOutcome':
        """
        Builds an outcome, computing welfare and allocated demand.

        :raises: :class:`chainmarket.exception.InvalidOperationError` on over-allocation or payments by losers
        :raises: :class:`chainmarket.exception.PaymentError` on negative payments
        """
        winners = tuple(int(w) for w in winners)
        total_d, _ = set_sums(winners, instance)
        if float_less(instance.config.D, total_d):
            raise InvalidOperationError('Allocated demand {} exceeds supply {}'.format(total_d, instance.config.D))
        for mid, pay in payments.items():
            if mid not in winners:
                raise InvalidOperationError('Payment for non-winner "{}"'.format(mid))
            if pay < 0:
                raise PaymentError('Negative payment for miner "{}": {}'.format(mid, pay))
        return cls(instance=instance, mechanism=mechanism, winners=winners,
                   payments={w: float(payments.get(w, 0.0)) for w in winners},
                   welfare=set_welfare(winners, instance), allocated=total_d)

    @classmethod
    def empty(cls, instance: Instance, mechanism: TMechanism) -> 'AuctionOutcome':
        return cls.build(instance, mechanism, (), {})

    @property
    def x(self) -> Dict[int, int]:
        """Allocation flags of every miner."""
        winners = set(self.winners)
        return {m.id: 1 if m.id in winners else 0 for m in self.instance.miners}

    @property
    def p(self) -> Dict[int, float]:
        """Payments of every miner, 0 for losers."""
        return {m.id: self.payments.get(m.id, 0.0) for m in self.instance.miners}

    @property
    def satisfaction_rate(self) -> float:
        """Fraction of the miners selected as winners."""
        if len(self.instance) == 0:
            return 0.0
        return len(self.winners) / len(self.instance)

    def is_winner(self, miner_id: int) -> bool:
        return miner_id in self.payments

    def payment(self, miner_id: int) -> float:
        self.instance.index_of(miner_id)
        return self.payments.get(miner_id, 0.0)

    def ex_post_value(self, miner_id: int) -> float:
        return ex_post_valuation(miner_id, self.instance, self.x)

    def hash_power(self, miner_id: int) -> float:
        return hash_power(miner_id, self.instance, self.x)

    def utility(self, miner_id: int) -> float:
        """
        True ex-post value minus payment.
        """
        return self.ex_post_value(miner_id) - self.payment(miner_id)
