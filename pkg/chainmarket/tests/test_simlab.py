import math
import os
import tempfile
import unittest

import numpy as np

from chainmarket.consts import MODE_CONSTANT, MODE_MULTI, MECHANISM_MDB, MECHANISM_CDB, MECHANISM_FRLS, \
    PARAM_N, PARAM_C, PARAM_THETA
from chainmarket.exception import InvalidParamError, SweepError, ConfigFileError, OptionError
from chainmarket.mechanism import Mechanism_CDB, Mechanism_MDB
from chainmarket.model import MarketConfig, AuctionOutcome
from chainmarket.simlab import gen_instance, point_seed, instance_seed, SweepSpec, run_sweep, preset, \
    preset_names, load_sweep_spec, utility_curve, probe_truthfulness, probe_rationality, probe_monotonicity, \
    probe_submodularity, probe_density_order, probe_campaign, probe_instances, PROBE_DEVIATIONS, ProbeReport, \
    PROBE_CRITICAL_OFFSETS, TruthfulnessGains


class OwnBidSurchargeMdb(Mechanism_MDB):
    """Adds a thousandth of the winner's own bid to its payment."""
    def run(self, instance):
        outcome = super().run(instance)
        return AuctionOutcome.build(instance, self.name, outcome.winners,
                                    {w: outcome.payment(w) + 1e-3 * instance.miner(w).b for w in outcome.winners})


class TestGenInstance(unittest.TestCase):
    def setUp(self):
        self.cfg = MarketConfig()

    def test_deterministic(self):
        a = gen_instance(self.cfg, 50, MODE_MULTI, instance_seed(point_seed(7, 0), 3))
        b = gen_instance(self.cfg, 50, MODE_MULTI, instance_seed(point_seed(7, 0), 3))
        self.assertEqual(a, b)
        self.assertTrue(np.array_equal(a.d, b.d))

    def test_seeds_differ(self):
        a = gen_instance(self.cfg, 20, MODE_MULTI, instance_seed(point_seed(7, 0), 0))
        b = gen_instance(self.cfg, 20, MODE_MULTI, instance_seed(point_seed(7, 0), 1))
        self.assertFalse(np.array_equal(a.s, b.s))
        self.assertNotEqual(point_seed(7, 0), point_seed(7, 1))

    def test_constant_mode(self):
        inst = gen_instance(self.cfg, 30, MODE_CONSTANT, 1)
        self.assertTrue(np.all(inst.d == 10.0))
        self.assertTrue(inst.is_constant_demand())
        self.assertEqual(inst.ids.tolist(), list(range(1, 31)))

    def test_multi_mode(self):
        inst = gen_instance(self.cfg, 500, MODE_MULTI, 2)
        self.assertTrue(np.all(inst.d > 0))
        self.assertTrue(np.all(inst.d <= 20.0))
        self.assertTrue(np.all(inst.s > 0))
        self.assertTrue(np.all(inst.s <= 1024.0))

    def test_truthful_bids(self):
        inst = gen_instance(self.cfg, 5, MODE_MULTI, 3)
        for m in inst.miners:
            expected = (12.5 + 0.007 * m.s) * math.exp(-0.001 * m.s / 15) * m.d
            self.assertAlmostEqual(m.b, expected, places=9)

    def test_prefix_stable(self):
        small = gen_instance(self.cfg, 10, MODE_MULTI, 4)
        large = gen_instance(self.cfg, 20, MODE_MULTI, 4)
        self.assertTrue(np.array_equal(small.s, large.s[:10]))
        self.assertTrue(np.array_equal(small.d, large.d[:10]))

    def test_invalid(self):
        with self.assertRaises(InvalidParamError):
            gen_instance(self.cfg, 0, MODE_MULTI, 1)
        with self.assertRaises(InvalidParamError):
            gen_instance(self.cfg, 5, 'other', 1)
        with self.assertRaises(InvalidParamError):
            point_seed(-1, 0)


class TestSweepSpec(unittest.TestCase):
    def test_invalid(self):
        with self.assertRaises(SweepError):
            SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_N, grid=())
        with self.assertRaises(SweepError):
            SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_N, grid=(10,), instances=0)
        with self.assertRaises(SweepError):
            SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter='gamma', grid=(1,))
        with self.assertRaises(SweepError):
            SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_N, grid=(10.5,))
        with self.assertRaises(SweepError):
            SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_THETA, grid=(0.5,))

    def test_point(self):
        spec = SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_THETA, grid=(0.0, 0.005))
        cfg, N, mode = spec.point(0.005)
        self.assertAlmostEqual(cfg.beta1, 0.005)
        self.assertAlmostEqual(cfg.beta2, 0.015)
        self.assertEqual(mode, MODE_MULTI)
        cfg, _, _ = spec.point(0.0)
        self.assertAlmostEqual(cfg.beta1, cfg.beta2)

        spec = SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_C, grid=(0.002,), miners=40)
        cfg, N, _ = spec.point(0.002)
        self.assertEqual(cfg.c, 0.002)
        self.assertEqual(N, 40)

    def test_common_random_numbers(self):
        spec = SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_C, grid=(0.001, 0.002))
        self.assertEqual(spec.point_seed(0), spec.point_seed(1))
        spec = SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_C, grid=(0.001, 0.002),
                         common_random_numbers=False)
        self.assertNotEqual(spec.point_seed(0), spec.point_seed(1))

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'sweep.yaml')
            with open(path, 'w', encoding='utf-8') as f:
                f.write('mechanism: frls\nparameter: c\ngrid: [0.001, 0.002]\nminers: 30\n'
                        'instances: 4\nseed: 99\nconfig:\n  T: 20\n')
            spec = load_sweep_spec(path, master_seed=5)
            self.assertEqual(spec.mechanism, MECHANISM_FRLS)
            self.assertEqual(spec.mode, MODE_MULTI)
            self.assertEqual(spec.grid, (0.001, 0.002))
            self.assertEqual(spec.master_seed, 99)
            self.assertEqual(spec.config.T, 20.0)

    def test_load_invalid(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'sweep.yaml')
            with open(path, 'w', encoding='utf-8') as f:
                f.write('mechanism: mdb\nunknown: 1\n')
            with self.assertRaises(OptionError):
                load_sweep_spec(path)
            with self.assertRaises(ConfigFileError):
                load_sweep_spec(os.path.join(tmpdir, 'missing.yaml'))


class TestRunSweep(unittest.TestCase):
    def test_statistics(self):
        spec = SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_N, grid=(5, 10), instances=3)
        result = run_sweep(spec)
        self.assertEqual(len(result.points), 2)
        p = result.points[0]
        self.assertEqual(p.parameter_value, 5)
        self.assertEqual(p.instances, 3)
        self.assertAlmostEqual(p.ci_halfwidth, 1.96 * p.std_welfare / math.sqrt(3))
        self.assertTrue(0 <= p.mean_satisfaction <= 1)
        self.assertEqual(result.column('parameter_value'), [5, 10])

    def test_single_instance(self):
        spec = SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_N, grid=(5,), instances=1)
        p = run_sweep(spec).points[0]
        self.assertEqual(p.std_welfare, 0.0)
        self.assertEqual(p.ci_halfwidth, 0.0)

    def test_jobs_do_not_change_results(self):
        spec = SweepSpec(mechanism=MECHANISM_MDB, mode=MODE_MULTI, parameter=PARAM_C, grid=(0.001, 0.004),
                         miners=20, instances=4)
        self.assertEqual(run_sweep(spec, jobs=1), run_sweep(spec, jobs=2))

    def test_mode_not_supported(self):
        spec = SweepSpec(mechanism=MECHANISM_CDB, mode=MODE_MULTI, parameter=PARAM_N, grid=(5,), instances=1)
        with self.assertRaises(SweepError):
            run_sweep(spec)

    def test_presets(self):
        self.assertIn('table3', preset_names())
        self.assertIn('fig5a', preset_names())
        spec = preset('table3')
        self.assertEqual(spec.grid, (10, 15, 20, 25))
        self.assertEqual(spec.mechanism, MECHANISM_MDB)
        spec = preset('fig4c', mechanism=MECHANISM_CDB)
        self.assertEqual(spec.mode, MODE_CONSTANT)
        with self.assertRaises(SweepError):
            preset('fig9')


class TestUtilityCurve(unittest.TestCase):
    def test_curve(self):
        cfg = MarketConfig()
        inst = gen_instance(cfg, 30, MODE_MULTI, 8)
        curve = utility_curve(inst, 3, 500.0, [1.0, 5.0, 10.0])
        self.assertEqual([d for d, _ in curve], [1.0, 5.0, 10.0])
        for _, u in curve:
            self.assertGreaterEqual(u, -1e-9)

    def test_invalid_demand(self):
        inst = gen_instance(MarketConfig(), 5, MODE_MULTI, 8)
        with self.assertRaises(InvalidParamError):
            utility_curve(inst, 3, 500.0, [0.0])


class TestProbes(unittest.TestCase):
    def setUp(self):
        self.cfg = MarketConfig()

    def test_truthfulness_identity(self):
        inst = gen_instance(self.cfg, 6, MODE_CONSTANT, 1)
        gains = probe_truthfulness(Mechanism_CDB(), inst, [1.0])
        self.assertEqual(gains, TruthfulnessGains(own=0.0, externality=0.0, payment_shift=0.0))

    def test_truthfulness(self):
        for k in range(5):
            probed, _ = probe_instances(self.cfg, Mechanism_MDB(), 3, k)
            gains = probe_truthfulness(Mechanism_MDB(), probed, PROBE_DEVIATIONS, PROBE_CRITICAL_OFFSETS)
            self.assertLessEqual(gains.own, 1e-9)
            self.assertLessEqual(gains.payment_shift, 1e-9)

    def test_overbid_pushing_competitor_out(self):
        # the tenfold bid of miner 8 drops miner 9 and raises miner 8's value more than its payment
        probed, _ = probe_instances(self.cfg, Mechanism_MDB(), 3, 3)
        gains = probe_truthfulness(Mechanism_MDB(), probed, [10.0])
        self.assertGreater(gains.externality, 1e-3)
        self.assertLessEqual(gains.own, 1e-9)
        self.assertEqual(gains.total, gains.externality)

    def test_payment_depending_on_own_bid(self):
        probed, _ = probe_instances(self.cfg, Mechanism_MDB(), 3, 0)
        gains = probe_truthfulness(OwnBidSurchargeMdb(), probed, [1.01])
        self.assertGreater(gains.payment_shift, 1e-9)

    def test_rationality(self):
        inst = gen_instance(self.cfg, 8, MODE_MULTI, 2)
        self.assertGreaterEqual(probe_rationality(Mechanism_MDB(), inst), -1e-9)
        inst = gen_instance(self.cfg, 8, MODE_CONSTANT, 2)
        self.assertGreaterEqual(probe_rationality(Mechanism_CDB(), inst), -1e-9)

    def test_rationality_no_winners(self):
        inst = gen_instance(self.cfg, 3, MODE_CONSTANT, 2)
        inst = inst.replace_miner(inst.miner(1).with_bid(0)).replace_miner(inst.miner(2).with_bid(0)) \
            .replace_miner(inst.miner(3).with_bid(0))
        self.assertEqual(probe_rationality(Mechanism_CDB(), inst), math.inf)

    def test_monotonicity(self):
        inst = gen_instance(self.cfg, 10, MODE_MULTI, 6)
        self.assertEqual(probe_monotonicity(Mechanism_MDB(), inst), 0)
        inst = gen_instance(self.cfg, 10, MODE_CONSTANT, 6)
        self.assertEqual(probe_monotonicity(Mechanism_CDB(), inst), 0)

    def test_submodularity(self):
        inst = gen_instance(self.cfg, 12, MODE_MULTI, 7)
        self.assertLessEqual(probe_submodularity(inst, 50, 7), 1e-9)

    def test_density_order(self):
        inst = gen_instance(self.cfg, 12, MODE_MULTI, 9)
        self.assertEqual(probe_density_order(inst), 0)

    def test_campaign(self):
        report = probe_campaign(Mechanism_CDB(), self.cfg, instances=5, master_seed=11)
        self.assertTrue(report.passed)
        self.assertEqual(report.instances, 5)
        self.assertEqual(report.to_dict()['mechanism'], MECHANISM_CDB)

    def test_campaign_externality_reported(self):
        report = probe_campaign(Mechanism_MDB(), self.cfg, instances=4, master_seed=3)
        self.assertTrue(report.passed, report.violations())
        self.assertFalse(report.externality_bound)
        self.assertNotIn('externality', report.violations())
        self.assertGreater(report.externality_gain, 1e-3)
        self.assertIn('externality_gain', report.to_dict())

    def test_campaign_externality_bound(self):
        report = ProbeReport(mechanism=MECHANISM_CDB, instances=1, seed=0, truthfulness_gain=0.0,
                             externality_gain=0.5, payment_shift=0.0, externality_bound=True,
                             rationality_margin=1.0, monotonicity_failures=0, submodularity_violation=0.0,
                             density_order_failures=0)
        self.assertFalse(report.passed)
        self.assertEqual(report.violations()['externality'], 0.5)

    def test_campaign_invalid(self):
        with self.assertRaises(InvalidParamError):
            probe_campaign(Mechanism_MDB(), self.cfg, instances=0)


if __name__ == '__main__':
    unittest.main()
