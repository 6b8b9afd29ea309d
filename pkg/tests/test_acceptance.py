"""
Desk-scale reproductions of the directional results. The retrieval ones train many encoders, so they only run when
the CHURNKIT_SLOW_TESTS environment variable is set.
"""
import os
import tempfile
import unittest

import numpy as np

from churnkit.cli.config_parser import load_config
from churnkit.cli.main import EXIT_OK, run
from churnkit.training.experiments import churn_experiment, retrieval_experiment

CONFIG_DIRECTORY = os.path.join(os.path.dirname(__file__), '..', 'configs')

slow_test = unittest.skipUnless(os.environ.get('CHURNKIT_SLOW_TESTS'), "set CHURNKIT_SLOW_TESTS to run")


class ChurnReductionTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        config, _ = load_config(os.path.join(CONFIG_DIRECTORY, 'churn.conf'))
        section = config.experiment
        plain, regularised = churn_experiment(section.train_config, [0.0, 0.3], section.pairs, section.dataset_spec,
                                              section.vary, config.workers, section.histogram_bins,
                                              section.base_seed)
        cls.plain = plain.aggregate()
        cls.regularised = regularised.aggregate()

    def test_no_failures(self):
        self.assertEqual(self.plain['failures'] + self.regularised['failures'], 0)
        self.assertEqual(self.plain['pairs'], 10)

    def test_kl_regulariser_reduces_churn(self):
        for metric in ('hard_churn', 'excess_soft_churn', 'l1_mean'):
            with self.subTest(metric=metric):
                self.assertLess(self.regularised[metric]['mean'], self.plain[metric]['mean'])

    def test_soft_churn_rise_is_self_uncertainty(self):
        # Smoothed predictions raise the soft churn of a model with itself, the part the pair adds shrinks
        plain_floor = self.plain['soft_churn']['mean'] - self.plain['excess_soft_churn']['mean']
        regularised_floor = self.regularised['soft_churn']['mean'] - self.regularised['excess_soft_churn']['mean']
        self.assertGreater(regularised_floor, plain_floor)


@slow_test
class CalibrationTestCase(unittest.TestCase):
    def test_cross_example_softmax_calibrates(self):
        config, _ = load_config(os.path.join(CONFIG_DIRECTORY, 'retrieval.conf'))
        section = config.experiment
        sampled, cross = retrieval_experiment(section.train_config, ['sampled-softmax', 'ce-softmax'], section.seeds,
                                              section.dataset_spec, config.workers, section.profile_queries)

        self.assertGreater(np.mean([run.pr_auc for run in cross.runs]),
                           np.mean([run.pr_auc for run in sampled.runs]))
        self.assertLess(np.mean([run.envelope_width for run in cross.runs]),
                        np.mean([run.envelope_width for run in sampled.runs]))


@slow_test
class DeterminismTestCase(unittest.TestCase):
    def test_byte_identical_outputs(self):
        for command, files in (('churn', ('churn_alpha0.0.csv', 'churn_alpha0.3.csv', 'stability.csv')),
                               ('retrieval', ('retrieval.csv', 'calibration.csv'))):
            config_file = os.path.join(CONFIG_DIRECTORY, '{}.conf'.format(command))
            with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
                self.assertEqual(run([command, '--config', config_file, '--out', first]), EXIT_OK)
                self.assertEqual(run([command, '--config', config_file, '--out', second]), EXIT_OK)

                for name in files:
                    with self.subTest(command=command, name=name):
                        with open(os.path.join(first, name), 'rb') as first_file, \
                                open(os.path.join(second, name), 'rb') as second_file:
                            self.assertEqual(first_file.read(), second_file.read())


if __name__ == '__main__':
    unittest.main()
