import unittest

from chainmarket.baselines import brute_force_opt
from chainmarket.cdb import CdbTrace, cdb_select, run_cdb
from chainmarket.consts import MODE_CONSTANT, MODE_MULTI
from chainmarket.exception import NotSupportedError
from chainmarket.model import MarketConfig, Miner, Instance, set_welfare
from chainmarket.simlab import gen_instance


def cdb_instance(bids, cfg=None):
    cfg = cfg if cfg is not None else MarketConfig()
    return Instance(cfg, tuple(Miner(id=k + 1, s=100.0, d=cfg.q, b=b) for k, b in enumerate(bids)))


class TestCdbSelect(unittest.TestCase):
    def test_two_miners(self):
        trace = cdb_select(cdb_instance([100, 150]))
        self.assertEqual(trace.sorted_bids, ((2, 150.0), (1, 100.0)))
        self.assertEqual(trace.stop_index, 2)
        self.assertEqual(trace.winners, (2, 1))
        self.assertAlmostEqual(trace.prefix_welfares[1], 2.41462, places=5)
        self.assertAlmostEqual(trace.prefix_welfares[2], 4.01197, places=5)

    def test_zero_bids(self):
        trace = cdb_select(cdb_instance([0, 0, 0]))
        self.assertEqual(trace.stop_index, 0)
        self.assertEqual(trace.winners, ())

    def test_equal_bids_lowest_id_first(self):
        trace = cdb_select(cdb_instance([100, 120, 120]))
        self.assertEqual([mid for mid, _ in trace.sorted_bids], [2, 3, 1])

    def test_seats(self):
        trace = cdb_select(cdb_instance([150, 100, 90], MarketConfig(D=25)))
        self.assertEqual(trace.winners, (1, 2))

    def test_multi_demand_rejected(self):
        inst = Instance(MarketConfig(), (Miner(1, 100, 10, 100), Miner(2, 100, 12, 100)))
        with self.assertRaises(NotSupportedError):
            cdb_select(inst)

    def test_prefix_increments_non_increasing(self):
        for D in (1000, 55):
            cfg = MarketConfig(D=D)
            for k in range(100):
                trace = cdb_select(gen_instance(cfg, 30, MODE_CONSTANT, 300 + k))
                increments = trace.increments()
                self.assertEqual(len(increments), len(trace.prefix_welfares) - 1)
                scale = max(abs(w) for w in trace.prefix_welfares)
                self.assertLessEqual(trace.concavity_violation(), 1e-9 * max(scale, 1.0))

    def test_concavity_violation_of_rising_trace(self):
        trace = CdbTrace(sorted_bids=((1, 10.0), (2, 5.0), (3, 1.0)),
                         prefix_welfares=(0.0, 1.0, 1.5, 2.5), stop_index=3)
        self.assertAlmostEqual(trace.concavity_violation(), 0.5)
        self.assertEqual(CdbTrace(sorted_bids=(), prefix_welfares=(0.0,), stop_index=0).concavity_violation(), 0.0)


class TestRunCdb(unittest.TestCase):
    def test_single_miner(self):
        outcome = run_cdb(cdb_instance([150]))
        self.assertEqual(outcome.winners, (1,))
        self.assertEqual(outcome.payment(1), 0.0)

    def test_two_miners(self):
        outcome = run_cdb(cdb_instance([150, 100]))
        self.assertEqual(outcome.winners, (1, 2))
        self.assertAlmostEqual(outcome.welfare, 4.01197, places=5)
        self.assertEqual(outcome.payment(1), 0.0)
        self.assertEqual(outcome.payment(2), 0.0)

    def test_unreplaced_winners_pay_nothing(self):
        outcome = run_cdb(cdb_instance([150, 100, 90, 0]))
        self.assertEqual(outcome.winners, (1, 2, 3))
        self.assertEqual([outcome.payment(w) for w in outcome.winners], [0.0, 0.0, 0.0])
        bound = run_cdb(cdb_instance([150, 100, 90], MarketConfig(D=25)))
        self.assertEqual(bound.winners, (1, 2))
        self.assertGreater(bound.payment(1), 1e-3)
        self.assertGreater(bound.payment(2), 1e-3)

    def test_capacity_bound(self):
        # a single seat
        inst = cdb_instance([150, 100], MarketConfig(D=15))
        outcome = run_cdb(inst)
        self.assertEqual(outcome.winners, (1,))
        self.assertAlmostEqual(outcome.payment(1), set_welfare([2], inst), places=9)
        self.assertEqual(outcome.payment(2), 0.0)

    def test_empty(self):
        outcome = run_cdb(cdb_instance([]))
        self.assertEqual(outcome.winners, ())
        self.assertEqual(outcome.welfare, 0.0)

    def test_zero_bids(self):
        outcome = run_cdb(cdb_instance([0, 0]))
        self.assertEqual(outcome.winners, ())
        self.assertEqual(outcome.p, {1: 0.0, 2: 0.0})

    def test_payments_bounded_by_value(self):
        cfg = MarketConfig(D=60)
        for k in range(20):
            inst = gen_instance(cfg, 10, MODE_CONSTANT, k)
            outcome = run_cdb(inst)
            for w in outcome.winners:
                self.assertGreaterEqual(outcome.payment(w), 0.0)
                self.assertGreaterEqual(outcome.utility(w), -1e-9)

    def test_matches_brute_force(self):
        cfg = MarketConfig()
        for k in range(20):
            inst = gen_instance(cfg, 12, MODE_CONSTANT, 100 + k)
            outcome = run_cdb(inst)
            winners, welfare = brute_force_opt(inst)
            self.assertAlmostEqual(outcome.welfare, welfare, delta=1e-9 * abs(welfare))
            self.assertEqual(sorted(outcome.winners), list(winners))

    def test_matches_brute_force_capacity_bound(self):
        cfg = MarketConfig(D=55)
        for k in range(20):
            inst = gen_instance(cfg, 12, MODE_CONSTANT, 200 + k)
            _, welfare = brute_force_opt(inst)
            self.assertAlmostEqual(run_cdb(inst).welfare, welfare, delta=1e-9 * abs(welfare))

    def test_multi_demand_rejected(self):
        inst = gen_instance(MarketConfig(), 5, MODE_MULTI, 1)
        with self.assertRaises(NotSupportedError):
            run_cdb(inst)


if __name__ == '__main__':
    unittest.main()
