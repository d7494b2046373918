import logging
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from tqdm import tqdm

from .baselines import SearchParams
from .consts import DEFAULT_MINERS, DEFAULT_INSTANCES, DEFAULT_SEED, DEFAULT_PROBE_INSTANCES, \
    MECHANISM_CDB, MECHANISM_MDB, MECHANISM_FRLS, MODE_CONSTANT, MODE_MULTI, SWEEP_PARAMETERS, \
    PARAM_N, PARAM_C, PARAM_T, PARAM_R, PARAM_LAMBDA, PARAM_THETA, PROBE_TOLERANCE
from .exception import SweepError, InvalidParamError, ConfigFileError
from .mdb import mdb_select
from .mechanism import Mechanism, MechanismRegistry, default_registry, Mechanism_MDB
from .model import MarketConfig, Miner, Instance, truthful_bid, truthful_bids, set_welfare, marginal_density
from .options import SweepOptions
from .types import TMechanism, TDemandMode, TSweepParameter
from .util import float_less

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]

CI_Z = 1.96
"""Normal quantile of the 95% confidence interval"""

PROBE_DEVIATIONS = (0.0, 0.5, 0.9, 0.99, 1.01, 2.0, 10.0)
"""Bid multipliers tried by the truthfulness probe"""

PROBE_CRITICAL_OFFSETS = (-1e-3, 1e-3)
"""Offsets around the critical bid tried by the truthfulness probe"""

PROBE_TRIPLES_PER_INSTANCE = 5

_PROBE_STREAM = 7919


#
# Random instances
#

def point_seed(master_seed: int, grid_key: int) -> int:
    """
    Seed of one sweep point, derived from the master seed and the point key.
    """
    if master_seed < 0 or grid_key < 0:
        raise InvalidParamError('Seeds must be non-negative: {}, {}'.format(master_seed, grid_key))
    return int(np.random.SeedSequence([master_seed, grid_key]).generate_state(1, np.uint64)[0])


def instance_seed(seed: int, instance_index: int) -> np.random.SeedSequence:
    """
    Seed sequence of the instance *instance_index* of a sweep point.
    """
    return np.random.SeedSequence([seed, instance_index])


def _stream(seed: Seed, stream: int) -> np.random.Generator:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    child = np.random.SeedSequence(ss.entropy, spawn_key=(*ss.spawn_key, stream))
    return np.random.Generator(np.random.Philox(child))


def gen_instance(cfg: MarketConfig, N: int, mode: TDemandMode, seed: Seed,
                 demand_range: Optional[Tuple[float, float]] = None) -> Instance:
    """
    Generates a random instance with truthful bids and miner ids ``1..N``.

    Block sizes are uniform on ``(0, s_max]``. Demands are q in constant mode, uniform on
    ``[beta1*D, beta2*D]`` (or *demand_range*) in multi mode, with zero draws redrawn. Block sizes and
    demands come from separate streams, so a larger instance extends a smaller one with the same seed.

    :raises: :class:`chainmarket.exception.InvalidParamError`
    """
    if N < 1:
        raise InvalidParamError('Instance needs at least one miner: {}'.format(N))
    rng_s = _stream(seed, 0)
    rng_d = _stream(seed, 1)

    s = cfg.s_max * (1.0 - rng_s.random(N))
    if mode == MODE_CONSTANT:
        d = np.full(N, cfg.q)
    elif mode == MODE_MULTI:
        lo, hi = demand_range if demand_range is not None else (cfg.beta1 * cfg.D, cfg.beta2 * cfg.D)
        if not (0 <= lo <= hi and hi > 0):
            raise InvalidParamError('Invalid demand range: [{}, {}]'.format(lo, hi))
        d = lo + (hi - lo) * rng_d.random(N)
        zeros = d <= 0
        while zeros.any():
            d[zeros] = lo + (hi - lo) * rng_d.random(int(zeros.sum()))
            zeros = d <= 0
    else:
        raise InvalidParamError('Unknown demand mode: "{}"'.format(mode))

    b = truthful_bids(s, d, cfg)
    return Instance(cfg, tuple(Miner(id=k + 1, s=float(s[k]), d=float(d[k]), b=float(b[k])) for k in range(N)))


#
# Sweeps
#

@dataclass(frozen=True)
class SweepSpec:
    """
    A parameter sweep.

    :param mechanism: mechanism name
    :param mode: demand mode
    :param parameter: swept parameter, one of ``N, c, T, r, lambda, theta, none``
    :param grid: values of the swept parameter
    :param miners: market size when N is not swept
    :param instances: instances per grid point
    :param master_seed: master seed
    :param common_random_numbers: every grid point draws the same instances; otherwise each point is
        keyed by its grid index
    :param config: base market configuration
    :param search: baseline search parameters
    :raises: :class:`chainmarket.exception.SweepError`
    """
    mechanism: TMechanism
    mode: TDemandMode
    parameter: TSweepParameter
    grid: Tuple[float, ...]
    miners: int = DEFAULT_MINERS
    instances: int = DEFAULT_INSTANCES
    master_seed: int = DEFAULT_SEED
    common_random_numbers: bool = True
    config: MarketConfig = field(default_factory=MarketConfig)
    search: SearchParams = field(default_factory=SearchParams)

    def __post_init__(self):
        object.__setattr__(self, 'grid', tuple(self.grid))
        if len(self.grid) == 0:
            raise SweepError('Sweep grid is empty')
        if self.instances < 1:
            raise SweepError('Sweep needs at least one instance per point: {}'.format(self.instances))
        if self.parameter not in SWEEP_PARAMETERS:
            raise SweepError('Unknown sweep parameter: "{}"'.format(self.parameter))
        if self.mode not in (MODE_CONSTANT, MODE_MULTI):
            raise SweepError('Unknown demand mode: "{}"'.format(self.mode))
        if self.master_seed < 0:
            raise SweepError('Master seed must be non-negative: {}'.format(self.master_seed))
        if self.parameter != PARAM_N and self.miners < 1:
            raise SweepError('Sweep needs at least one miner: {}'.format(self.miners))
        for value in self.grid:
            self._check_value(value)

    def _check_value(self, value: float) -> None:
        if self.parameter == PARAM_N:
            if int(value) != value or value < 1:
                raise SweepError('Invalid miner count in grid: {}'.format(value))
        elif self.parameter == PARAM_THETA:
            cfg = self.config
            limit = min(cfg.q / cfg.D, 1 - cfg.q / cfg.D)
            if value < 0 or float_less(limit, value):
                raise SweepError('Dispersion {} outside [0, {}]'.format(value, limit))

    def point(self, value: float) -> Tuple[MarketConfig, int, TDemandMode]:
        """
        Configuration, market size and demand mode of one grid value.

        :raises: :class:`chainmarket.exception.ConfigError`
        """
        cfg, N, mode = self.config, self.miners, self.mode
        if self.parameter == PARAM_N:
            N = int(value)
        elif self.parameter == PARAM_C:
            cfg = cfg.replace(c=value)
        elif self.parameter == PARAM_T:
            cfg = cfg.replace(T=value)
        elif self.parameter == PARAM_R:
            cfg = cfg.replace(r=value)
        elif self.parameter == PARAM_LAMBDA:
            cfg = cfg.replace(lam=value)
        elif self.parameter == PARAM_THETA:
            # dispersion around q
            cfg = cfg.replace(beta1=max(0.0, (cfg.q - value * cfg.D) / cfg.D),
                              beta2=(cfg.q + value * cfg.D) / cfg.D)
            mode = MODE_MULTI
        return cfg, N, mode

    def point_seed(self, grid_index: int) -> int:
        return point_seed(self.master_seed, 0 if self.common_random_numbers else grid_index)

    @classmethod
    def from_options(cls, options: SweepOptions, master_seed: Optional[int] = None,
                     base: Optional[MarketConfig] = None) -> 'SweepSpec':
        """
        Builds a spec from :class:`chainmarket.options.SweepOptions`.

        :param master_seed: seed used when the options have none
        :param base: configuration the *config* overrides apply to, defaults if None
        """
        seed = options.option_get('seed')
        if seed is None:
            seed = master_seed if master_seed is not None else DEFAULT_SEED
        overrides = {}
        if options.options is not None and isinstance(options.options.get('config'), Mapping):
            overrides = options.options['config']
        return cls(
            mechanism=TMechanism(options.option_get('mechanism')),
            mode=TDemandMode(options.option_get('mode')),
            parameter=TSweepParameter(options.option_get('parameter')),
            grid=tuple(options.option_get('grid')),
            miners=options.option_get('miners'),
            instances=options.option_get('instances'),
            master_seed=seed,
            common_random_numbers=options.option_get('common_random_numbers'),
            config=(base if base is not None else MarketConfig()).with_overrides(overrides),
        )


def load_sweep_spec(path: str, master_seed: Optional[int] = None, base: Optional[MarketConfig] = None) -> SweepSpec:
    """
    Reads a YAML sweep spec file.

    :raises: :class:`chainmarket.exception.ConfigFileError`
    :raises: :class:`chainmarket.exception.OptionError`
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigFileError('Could not read sweep spec "{}": {}'.format(path, e)) from e
    if not isinstance(data, dict):
        raise ConfigFileError('Sweep spec "{}" must be a mapping'.format(path))
    return SweepSpec.from_options(SweepOptions(data), master_seed=master_seed, base=base)


@dataclass(frozen=True)
class SweepPoint:
    """
    Statistics of one grid point.
    """
    parameter_value: float
    mean_welfare: float
    std_welfare: float
    ci_halfwidth: float
    mean_satisfaction: float
    std_satisfaction: float
    instances: int
    seed: int


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    points: Tuple[SweepPoint, ...]

    def column(self, name: str) -> List[Any]:
        return [getattr(p, name) for p in self.points]


@dataclass(frozen=True)
class _SweepTask:
    mechanism: Mechanism
    config: MarketConfig
    miners: int
    mode: TDemandMode
    seed: int
    instance_index: int


def _run_task(task: _SweepTask) -> Tuple[float, float]:
    inst = gen_instance(task.config, task.miners, task.mode, instance_seed(task.seed, task.instance_index))
    outcome = task.mechanism.run(inst)
    return outcome.welfare, outcome.satisfaction_rate


def _statistics(values: np.ndarray) -> Tuple[float, float]:
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return mean, std


def run_sweep(spec: SweepSpec, jobs: int = 1, registry: Optional[MechanismRegistry] = None,
              progress: bool = False) -> SweepResult:
    """
    Runs every instance of every grid point and aggregates welfare and satisfaction rate.
    Results are gathered in grid and instance order, so they do not depend on *jobs*.

    :param jobs: number of worker processes
    :param registry: mechanisms to look the sweep mechanism up in
    :param progress: show a progress bar
    :raises: :class:`chainmarket.exception.SweepError`
    """
    if jobs < 1:
        raise SweepError('Sweep needs at least one job: {}'.format(jobs))
    if registry is None:
        registry = default_registry(spec.search)
    mechanism = registry.get(spec.mechanism)

    points = []
    tasks: List[_SweepTask] = []
    for gi, value in enumerate(spec.grid):
        cfg, N, mode = spec.point(value)
        if mode not in mechanism.demand_modes():
            raise SweepError('Mechanism "{}" does not support demand mode "{}"'.format(mechanism.name, mode))
        seed = spec.point_seed(gi)
        points.append((value, seed))
        tasks.extend(_SweepTask(mechanism, cfg, N, mode, seed, k) for k in range(spec.instances))

    logger.info('sweep %s over %s: %d points, %d instances each, %d jobs',
                spec.mechanism, spec.parameter, len(points), spec.instances, jobs)
    bar = dict(total=len(tasks), disable=not progress, desc='{}/{}'.format(spec.mechanism, spec.parameter))
    if jobs == 1:
        results = [_run_task(t) for t in tqdm(tasks, **bar)]
    else:
        chunksize = max(1, len(tasks) // (jobs * 8))
        with multiprocessing.Pool(jobs) as pool:
            results = list(tqdm(pool.imap(_run_task, tasks, chunksize=chunksize), **bar))

    out = []
    K = spec.instances
    for gi, (value, seed) in enumerate(points):
        chunk = np.array(results[gi * K:(gi + 1) * K], dtype=np.float64)
        mean_w, std_w = _statistics(chunk[:, 0])
        mean_s, std_s = _statistics(chunk[:, 1])
        out.append(SweepPoint(parameter_value=value, mean_welfare=mean_w, std_welfare=std_w,
                              ci_halfwidth=CI_Z * std_w / math.sqrt(K), mean_satisfaction=mean_s,
                              std_satisfaction=std_s, instances=K, seed=seed))
        logger.info('point %s=%s: welfare %.6g +- %.3g, satisfaction %.4g',
                    spec.parameter, value, mean_w, out[-1].ci_halfwidth, mean_s)
    return SweepResult(spec=spec, points=tuple(out))


#
# Presets
#

PRESET_TABLE3 = 'table3'
PRESET_TABLE3_FRLS = 'table3frls'
PRESET_FIG3 = 'fig3'
PRESET_FIG4C = 'fig4c'
PRESET_FIG4T = 'fig4T'
PRESET_FIG4R = 'fig4r'
PRESET_FIG4LAMBDA = 'fig4lambda'
PRESET_FIG5A = 'fig5a'
PRESET_FIG5B = 'fig5b'

GRID_N = tuple(range(50, 501, 50))
GRID_C = tuple(round(0.0005 * k, 6) for k in range(1, 11))
GRID_T = (5.0, 10.0, 15.0, 20.0, 25.0)
GRID_R = (0.001, 0.005, 0.01, 0.015, 0.02)
GRID_LAMBDA = tuple(float(v) for v in range(5, 61, 5))
GRID_THETA = (0.0, 0.002, 0.004, 0.006, 0.008, 0.01)

_PRESETS: Mapping[str, Tuple[TMechanism, TSweepParameter, Tuple[float, ...]]] = {
    PRESET_TABLE3: (MECHANISM_MDB, PARAM_N, (10, 15, 20, 25)),
    PRESET_TABLE3_FRLS: (MECHANISM_FRLS, PARAM_N, (10, 15, 20, 25)),
    PRESET_FIG3: (MECHANISM_MDB, PARAM_N, GRID_N),
    PRESET_FIG4C: (MECHANISM_MDB, PARAM_C, GRID_C),
    PRESET_FIG4T: (MECHANISM_MDB, PARAM_T, GRID_T),
    PRESET_FIG4R: (MECHANISM_MDB, PARAM_R, GRID_R),
    PRESET_FIG4LAMBDA: (MECHANISM_MDB, PARAM_LAMBDA, GRID_LAMBDA),
    PRESET_FIG5B: (MECHANISM_MDB, PARAM_THETA, GRID_THETA),
}


def preset_names() -> List[str]:
    return [*_PRESETS.keys(), PRESET_FIG5A]


def preset(name: str, master_seed: int = DEFAULT_SEED, config: Optional[MarketConfig] = None,
           mechanism: Optional[TMechanism] = None, instances: int = DEFAULT_INSTANCES,
           miners: int = DEFAULT_MINERS) -> SweepSpec:
    """
    Sweep spec of a named preset. A replacement *mechanism* may be given; a constant-demand mechanism
    runs in constant mode.

    :raises: :class:`chainmarket.exception.SweepError` on unknown presets
    """
    if name not in _PRESETS:
        raise SweepError('Unknown preset: "{}"'.format(name))
    default_mechanism, parameter, grid = _PRESETS[name]
    mechanism = mechanism if mechanism is not None else default_mechanism
    mode = MODE_CONSTANT if mechanism == MECHANISM_CDB else MODE_MULTI
    return SweepSpec(mechanism=mechanism, mode=mode, parameter=parameter, grid=grid, miners=miners,
                     instances=instances, master_seed=master_seed,
                     config=config if config is not None else MarketConfig())


#
# Utility curves
#

def utility_curve(inst: Instance, target_id: int, s_level: float, d_grid: Sequence[float],
                  mechanism: Optional[Mechanism] = None) -> List[Tuple[float, float]]:
    """
    Utility of miner *target_id* with block size *s_level* as its true demand sweeps *d_grid*, bidding
    truthfully while every other miner stays fixed.

    :raises: :class:`chainmarket.exception.NotFoundError` if the target does not exist
    :raises: :class:`chainmarket.exception.InvalidParamError` on non-positive demands
    """
    inst.index_of(target_id)
    if mechanism is None:
        mechanism = Mechanism_MDB()
    curve = []
    for d in d_grid:
        if not d > 0:
            raise InvalidParamError('Demands must be positive: {}'.format(d))
        miner = Miner(id=target_id, s=s_level, d=d, b=truthful_bid(s_level, d, inst.config))
        outcome = mechanism.run(inst.replace_miner(miner))
        curve.append((float(d), outcome.utility(target_id)))
    return curve


FIG5A_TARGET = 120
FIG5A_S_LEVELS = (300.0, 1000.0)
FIG5A_DEMANDS = tuple(float(d) for d in range(1, 21))


def threshold_curves(cfg: MarketConfig, master_seed: int = DEFAULT_SEED, miners: int = DEFAULT_MINERS,
                     target_id: int = FIG5A_TARGET, s_levels: Sequence[float] = FIG5A_S_LEVELS,
                     d_grid: Sequence[float] = FIG5A_DEMANDS) -> Tuple[int, List[Tuple[float, ...]]]:
    """
    Utility curves of one miner of a fixed-seed population at several block sizes.

    :return: the population seed and rows of ``(demand, utility at each s level)``
    """
    seed = point_seed(master_seed, 0)
    inst = gen_instance(cfg, miners, MODE_MULTI, instance_seed(seed, 0))
    curves = [utility_curve(inst, target_id, s, d_grid) for s in s_levels]
    rows = [(d, *[c[k][1] for c in curves]) for k, d in enumerate(d_grid)]
    return seed, rows


#
# Probes
#

@dataclass(frozen=True)
class TruthfulnessGains:
    """
    Largest utility gains of single-miner bid misreports, split by whether the other winners stay.

    :param own: gain over misreports that leave the other winners unchanged
    :param externality: gain over misreports that change the other winners
    :param payment_shift: largest payment change of a miner that keeps winning with the same other winners
    """
    own: float
    externality: float
    payment_shift: float

    @property
    def total(self) -> float:
        return max(self.own, self.externality)


def probe_truthfulness(mechanism: Mechanism, inst: Instance, deviations: Sequence[float],
                       critical_offsets: Sequence[float] = ()) -> TruthfulnessGains:
    """
    Utility gains of every miner misreporting its bid. Utilities use the miner's true valuation.
    Deviations are bid multipliers; *critical_offsets* are added to each winner's critical bid when the
    mechanism reports one. Gains are 0 when nothing was tried.
    """
    truthful = mechanism.run(inst)
    critical = mechanism.critical_bids(truthful) if critical_offsets else {}
    own = -math.inf
    externality = -math.inf
    shift = 0.0
    for miner in inst.miners:
        base = truthful.utility(miner.id)
        others = set(truthful.winners) - {miner.id}
        bids = [miner.b * f for f in deviations]
        if miner.id in critical:
            bids.extend(critical[miner.id] + o for o in critical_offsets if critical[miner.id] + o >= 0)
        for bid in bids:
            outcome = mechanism.run(inst.replace_miner(miner.with_bid(bid)))
            delta = outcome.utility(miner.id) - base
            if set(outcome.winners) - {miner.id} != others:
                if delta > PROBE_TOLERANCE:
                    logger.info('miner %s gains %g bidding %g instead of %g, other winners change',
                                miner.id, delta, bid, miner.b)
                externality = max(externality, delta)
                continue
            if delta > PROBE_TOLERANCE:
                logger.error('miner %s gains %g bidding %g instead of %g', miner.id, delta, bid, miner.b)
            own = max(own, delta)
            if truthful.is_winner(miner.id) and outcome.is_winner(miner.id):
                shift = max(shift, abs(outcome.payment(miner.id) - truthful.payment(miner.id)))
    return TruthfulnessGains(own=own if own != -math.inf else 0.0,
                             externality=externality if externality != -math.inf else 0.0,
                             payment_shift=shift)


def probe_rationality(mechanism: Mechanism, inst: Instance) -> float:
    """
    Smallest winner margin: bid minus critical bid for critical-bid mechanisms, utility otherwise.
    ``+inf`` without winners, ``-inf`` if a loser pays or a payment is negative.
    """
    return mechanism.rationality_margin(mechanism.run(inst))


def probe_monotonicity(mechanism: Mechanism, inst: Instance) -> int:
    """
    Number of winners that lose after improving their request: a higher bid in constant-demand markets,
    a smaller demand with an equal or higher bid otherwise.
    """
    outcome = mechanism.run(inst)
    constant = MODE_MULTI not in mechanism.demand_modes()
    failures = 0
    for w in outcome.winners:
        miner = inst.miner(w)
        if constant:
            variants = [miner.with_bid(miner.b * f) for f in (1.01, 2.0, 10.0)]
        else:
            variants = [Miner(id=miner.id, s=miner.s, d=miner.d * fd, b=miner.b * fb)
                        for fd in (0.5, 0.9) for fb in (1.0, 2.0)]
        for v in variants:
            if not mechanism.run(inst.replace_miner(v)).is_winner(w):
                logger.error('winner %s loses with demand %g and bid %g', w, v.d, v.b)
                failures += 1
    return failures


def probe_submodularity(inst: Instance, triples: int, seed: Seed) -> float:
    """
    Largest violation ``S_u(B) - S_u(M)`` over random triples ``M ⊂ B``, ``u ∉ B`` with ``B ∪ {u}``
    within supply, where ``S_u(X)`` is the welfare gain of adding *u* to *X*.

    :return: the maximum violation, 0 when every triple holds
    """
    if len(inst) < 2:
        return 0.0
    rng = _stream(seed, 2)
    cfg = inst.config
    worst = 0.0
    for _ in range(triples):
        perm = rng.permutation(len(inst))
        u = int(inst.ids[perm[0]])
        others = perm[1:]
        b_size = int(rng.integers(1, len(others) + 1))
        B = [int(inst.ids[j]) for j in others[:b_size]]
        M = B[:int(rng.integers(0, b_size))]
        total = float(inst.d[others[:b_size]].sum() + inst.d[perm[0]])
        if float_less(cfg.D, total):
            continue
        gain_m = set_welfare(M + [u], inst) - set_welfare(M, inst)
        gain_b = set_welfare(B + [u], inst) - set_welfare(B, inst)
        worst = max(worst, gain_b - gain_m)
    return worst


def probe_density_order(inst: Instance) -> int:
    """
    Number of multi-demand greedy steps whose chosen miner does not maximize the marginal density over
    the remaining miners.
    """
    trace = mdb_select(inst)
    failures = 0
    chosen: List[int] = []
    for step in trace.steps:
        for m in inst.miners:
            if m.id in chosen or m.id == step.miner_id:
                continue
            if float_less(step.density, marginal_density(m.id, chosen, inst)):
                logger.error('miner %s beats step choice %s', m.id, step.miner_id)
                failures += 1
        if step.accepted:
            chosen.append(step.miner_id)
    return failures


@dataclass(frozen=True)
class ProbeReport:
    """
    Largest violation of each probed property. The externality gain counts as a violation only for
    mechanisms that are truthful with externalities; otherwise it is reported alongside.
    """
    mechanism: TMechanism
    instances: int
    seed: int
    truthfulness_gain: float
    externality_gain: float
    payment_shift: float
    externality_bound: bool
    rationality_margin: float
    monotonicity_failures: int
    submodularity_violation: float
    density_order_failures: int

    def violations(self) -> Dict[str, float]:
        ret = {
            'truthfulness': max(0.0, self.truthfulness_gain),
            'payment_independence': self.payment_shift,
            'rationality': max(0.0, -self.rationality_margin),
            'monotonicity': float(self.monotonicity_failures),
            'submodularity': max(0.0, self.submodularity_violation),
            'density_order': float(self.density_order_failures),
        }
        if self.externality_bound:
            ret['externality'] = max(0.0, self.externality_gain)
        return ret

    @property
    def passed(self) -> bool:
        return all(v <= PROBE_TOLERANCE for v in self.violations().values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mechanism': self.mechanism,
            'instances': self.instances,
            'seed': self.seed,
            'passed': self.passed,
            'max_violation': self.violations(),
            'truthfulness_gain': self.truthfulness_gain,
            'externality_gain': self.externality_gain,
            'externality_bound': self.externality_bound,
            'rationality_margin': self.rationality_margin,
        }


def probe_instances(cfg: MarketConfig, mechanism: Mechanism, master_seed: int,
                    index: int) -> Tuple[Instance, Instance]:
    """
    The two instances of one probe round: the market bids are probed on, and the unrestricted market.
    Multi-demand probe markets draw demands of at least one resource unit.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, _PROBE_STREAM, index])))
    N = int(rng.integers(2, 13))
    seed = np.random.SeedSequence([master_seed, _PROBE_STREAM + 1, index])
    if MODE_MULTI not in mechanism.demand_modes():
        inst = gen_instance(cfg, N, MODE_CONSTANT, seed)
        return inst, inst
    hi = cfg.beta2 * cfg.D
    lo = min(max(cfg.beta1 * cfg.D, 1.0), hi)
    return gen_instance(cfg, N, MODE_MULTI, seed, demand_range=(lo, hi)), \
        gen_instance(cfg, N, MODE_MULTI, seed)


def probe_campaign(mechanism: Mechanism, cfg: MarketConfig, instances: int = DEFAULT_PROBE_INSTANCES,
                   master_seed: int = DEFAULT_SEED, progress: bool = False) -> ProbeReport:
    """
    Runs every probe on *instances* random markets.

    :raises: :class:`chainmarket.exception.InvalidParamError` if *instances* is not positive
    """
    if instances < 1:
        raise InvalidParamError('Probe needs at least one instance: {}'.format(instances))
    multi = MODE_MULTI in mechanism.demand_modes()
    own = -math.inf
    externality = -math.inf
    shift = 0.0
    margin = math.inf
    monotonicity = 0
    submodularity = 0.0
    density_order = 0
    for k in tqdm(range(instances), disable=not progress, desc='probe {}'.format(mechanism.name)):
        probed, market = probe_instances(cfg, mechanism, master_seed, k)
        gains = probe_truthfulness(mechanism, probed, PROBE_DEVIATIONS, PROBE_CRITICAL_OFFSETS)
        own = max(own, gains.own)
        externality = max(externality, gains.externality)
        shift = max(shift, gains.payment_shift)
        margin = min(margin, probe_rationality(mechanism, probed), probe_rationality(mechanism, market))
        monotonicity += probe_monotonicity(mechanism, market)
        submodularity = max(submodularity, probe_submodularity(
            market, PROBE_TRIPLES_PER_INSTANCE, np.random.SeedSequence([master_seed, _PROBE_STREAM + 2, k])))
        if multi:
            density_order += probe_density_order(market)
    return ProbeReport(mechanism=mechanism.name, instances=instances, seed=master_seed,
                       truthfulness_gain=own, externality_gain=externality, payment_shift=shift,
                       externality_bound=mechanism.is_truthful_with_externalities(), rationality_margin=margin,
                       monotonicity_failures=monotonicity, submodularity_violation=submodularity,
                       density_order_failures=density_order)
