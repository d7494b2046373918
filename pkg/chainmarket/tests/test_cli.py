import os
import tempfile
import unittest
from unittest import mock

import yaml

from chainmarket.cli import main, resolve_seed
from chainmarket.consts import DEFAULT_SEED, SEED_ENV, EXIT_OK, EXIT_INVALID_INPUT, EXIT_INVALID_CONFIG, \
    EXIT_TOO_LARGE, EXIT_PROBE_VIOLATION
from chainmarket.exception import InvalidParamError
from chainmarket.mechanism import MechanismRegistry, Mechanism_CDB, Mechanism_MDB
from chainmarket.model import AuctionOutcome


class BrokenPaymentMdb(Mechanism_MDB):
    """Charges every winner one token more than the critical payment."""
    def run(self, instance):
        outcome = super().run(instance)
        return AuctionOutcome.build(instance, self.name, outcome.winners,
                                    {w: outcome.payment(w) + 1.0 for w in outcome.winners})


def read_summary(path):
    with open(path, 'r', encoding='utf-8') as f:
        lines = f.read().splitlines()
    summary = [ln for ln in lines if ln.startswith('# ')][0]
    return dict(item.split('=') for item in summary[2:].split()), lines


class TestCli(unittest.TestCase):
    def setUp(self):
        self._tmpdir = tempfile.TemporaryDirectory()
        self.tmpdir = self._tmpdir.name

    def tearDown(self):
        self._tmpdir.cleanup()

    def path(self, name):
        return os.path.join(self.tmpdir, name)

    def write(self, name, contents):
        with open(self.path(name), 'w', encoding='utf-8') as f:
            f.write(contents)
        return self.path(name)

    def read(self, name):
        with open(self.path(name), 'r', encoding='utf-8') as f:
            return f.read()

    def test_auction_cdb(self):
        instance = self.write('cdb.csv', 'id,s,d,b\n1,100,10,150\n2,100,10,100\n')
        code = main(['auction', '--mechanism', 'cdb', '--instance', instance, '--out', self.path('out.csv')])
        self.assertEqual(code, EXIT_OK)
        summary, lines = read_summary(self.path('out.csv'))
        self.assertEqual(lines[0], 'miner_id,s,d,b,x,payment,ex_post_value,utility')
        self.assertEqual(len(lines), 4)
        self.assertAlmostEqual(float(summary['welfare']), 4.01197, places=5)
        self.assertEqual(summary['winners'], '2')
        self.assertEqual(float(summary['satisfaction_rate']), 1.0)

    def test_auction_empty(self):
        instance = self.write('empty.csv', 'id,s,d\n')
        code = main(['auction', '--instance', instance, '--out', self.path('out.csv')])
        self.assertEqual(code, EXIT_OK)
        summary, _ = read_summary(self.path('out.csv'))
        self.assertEqual(summary['welfare'], '0')
        self.assertEqual(summary['winners'], '0')

    def test_auction_overrides(self):
        instance = self.write('cdb.csv', 'id,s,d,b\n1,100,10,150\n2,100,10,100\n')
        config = self.write('market.conf', 'c = 0.002\n')
        code = main(['auction', '--mechanism', 'brute', '--instance', instance, '--config', config,
                     '--set', 'c=0.003', '--out', self.path('out.csv')])
        self.assertEqual(code, EXIT_OK)
        summary, _ = read_summary(self.path('out.csv'))
        self.assertAlmostEqual(float(summary['welfare']), 4.01197 + 0.02 - 0.06, places=5)

    def test_auction_cdb_on_multi_demand(self):
        instance = self.write('multi.csv', 'id,s,d\n1,100,10\n2,100,12\n')
        self.assertEqual(main(['auction', '--mechanism', 'cdb', '--instance', instance,
                               '--out', self.path('out.csv')]), EXIT_INVALID_CONFIG)

    def test_auction_errors(self):
        instance = self.write('cdb.csv', 'id,s,d,b\n1,100,10,150\n')
        self.assertEqual(main(['auction', '--instance', self.path('missing.csv')]), EXIT_INVALID_INPUT)
        self.assertEqual(main(['auction', '--instance', self.write('bad.csv', 'id,s\n1,2\n')]),
                         EXIT_INVALID_INPUT)
        self.assertEqual(main(['auction', '--mechanism', 'vcg', '--instance', instance]), EXIT_INVALID_INPUT)
        self.assertEqual(main(['auction', '--instance', instance, '--set', 'gamma=1']), EXIT_INVALID_CONFIG)
        self.assertEqual(main(['auction', '--instance', instance, '--set', 'q=5000']), EXIT_INVALID_CONFIG)
        self.assertEqual(main(['auction']), EXIT_INVALID_INPUT)

    def test_gen_and_brute_guard(self):
        code = main(['gen', '--miners', '23', '--seed', '5', '--out', self.path('miners.csv'),
                     '--config-out', self.path('market.conf')])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(self.read('miners.csv').splitlines()), 24)
        self.assertIn('lambda = 15', self.read('market.conf'))
        self.assertEqual(main(['auction', '--mechanism', 'brute', '--instance', self.path('miners.csv'),
                               '--config', self.path('market.conf')]), EXIT_TOO_LARGE)

    def test_gen_deterministic(self):
        main(['gen', '--miners', '10', '--seed', '5', '--out', self.path('a.csv')])
        main(['gen', '--miners', '10', '--seed', '5', '--out', self.path('b.csv')])
        main(['gen', '--miners', '10', '--seed', '6', '--out', self.path('c.csv')])
        self.assertEqual(self.read('a.csv'), self.read('b.csv'))
        self.assertNotEqual(self.read('a.csv'), self.read('c.csv'))

    def test_sweep_spec_deterministic(self):
        spec = self.write('sweep.yaml', 'mechanism: mdb\nparameter: N\ngrid: [5, 10]\ninstances: 1\n')
        self.assertEqual(main(['sweep', '--spec', spec, '--seed', '3', '--out', self.path('a.csv')]), EXIT_OK)
        self.assertEqual(main(['sweep', '--spec', spec, '--seed', '3', '--out', self.path('b.csv')]), EXIT_OK)
        self.assertEqual(main(['sweep', '--spec', spec, '--seed', '3', '--jobs', '2', '--instances', '1',
                               '--out', self.path('c.csv')]), EXIT_OK)
        self.assertEqual(self.read('a.csv'), self.read('b.csv'))
        self.assertEqual(self.read('a.csv'), self.read('c.csv'))
        lines = self.read('a.csv').splitlines()
        self.assertEqual(lines[0], 'parameter_value,mean_welfare,ci_halfwidth,mean_satisfaction,K,seed')
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[1].startswith('5,'))

    def test_sweep_preset(self):
        code = main(['sweep', '--preset', 'fig4c', '--instances', '2', '--miners', '20',
                     '--out', self.path('fig4c.csv')])
        self.assertEqual(code, EXIT_OK)
        rows = [ln.split(',') for ln in self.read('fig4c.csv').splitlines()[1:]]
        self.assertEqual(len(rows), 10)
        welfare = [float(r[1]) for r in rows]
        for a, b in zip(welfare, welfare[1:]):
            self.assertLess(b, a)

    def test_sweep_fig5a(self):
        code = main(['sweep', '--preset', 'fig5a', '--miners', '130', '--out', self.path('fig5a.csv')])
        self.assertEqual(code, EXIT_OK)
        lines = self.read('fig5a.csv').splitlines()
        self.assertEqual(lines[0], 'parameter_value,utility_s300,utility_s1000,seed')
        self.assertEqual(len(lines), 21)

    def test_sweep_errors(self):
        self.assertEqual(main(['sweep', '--preset', 'fig9']), EXIT_INVALID_INPUT)
        self.assertEqual(main(['sweep']), EXIT_INVALID_INPUT)
        self.assertEqual(main(['sweep', '--preset', 'table3', '--instances', '0']), EXIT_INVALID_INPUT)

    def test_probe(self):
        code = main(['probe', '--mechanism', 'cdb', '--instances', '3', '--out', self.path('probe.yaml')])
        self.assertEqual(code, EXIT_OK)
        report = yaml.safe_load(self.read('probe.yaml'))
        self.assertTrue(report['passed'])
        self.assertEqual(report['instances'], 3)

    def test_mdb_externality_reported(self):
        code = main(['probe', '--mechanism', 'mdb', '--instances', '4', '--seed', '3',
                     '--out', self.path('probe.yaml')])
        self.assertEqual(code, EXIT_OK)
        report = yaml.safe_load(self.read('probe.yaml'))
        self.assertTrue(report['passed'])
        self.assertFalse(report['externality_bound'])
        self.assertGreater(report['externality_gain'], 1e-3)
        self.assertLessEqual(report['max_violation']['truthfulness'], 1e-9)

    def test_probe_errors(self):
        self.assertEqual(main(['probe', '--instances', '0']), EXIT_INVALID_INPUT)
        self.assertEqual(main(['probe', '--mechanism', 'frls', '--instances', '1']), EXIT_INVALID_INPUT)

    def test_probe_broken_payment(self):
        registry = MechanismRegistry([Mechanism_CDB(), BrokenPaymentMdb()])
        code = main(['probe', '--mechanism', 'mdb', '--instances', '2', '--out', self.path('probe.yaml')],
                    registry=registry)
        self.assertEqual(code, EXIT_PROBE_VIOLATION)
        report = yaml.safe_load(self.read('probe.yaml'))
        self.assertFalse(report['passed'])
        self.assertGreater(report['max_violation']['rationality'], 0)


class TestSeed(unittest.TestCase):
    def test_resolve(self):
        with mock.patch.dict(os.environ, {SEED_ENV: ''}):
            self.assertEqual(resolve_seed(None), DEFAULT_SEED)
        with mock.patch.dict(os.environ, {SEED_ENV: '42'}):
            self.assertEqual(resolve_seed(None), 42)
            self.assertEqual(resolve_seed(7), 7)
        with mock.patch.dict(os.environ, {SEED_ENV: 'abc'}):
            with self.assertRaises(InvalidParamError):
                resolve_seed(None)
        with self.assertRaises(InvalidParamError):
            resolve_seed(-1)


if __name__ == '__main__':
    unittest.main()
