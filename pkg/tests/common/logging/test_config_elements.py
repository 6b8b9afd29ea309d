"""
Test the logging section of experiment configuration files
"""
import logging
import logging.handlers
import os
import tempfile
import unittest

from ZConfig import ConfigurationError

from churnkit.cli.config_parser import load_config
from churnkit.common.logging import DEBUG_EPOCHS

EXPERIMENT = """\
<churn-experiment>
    dataset-seed 1
    alphas 0
    base-seed 1
</churn-experiment>
"""


class LoggingConfigTestCase(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)
        self.log_file = os.path.join(self.directory.name, 'run.log')
        self.logger = logging.getLogger('churnkit.tests.logging')
        self.addCleanup(self.remove_handlers)

    def remove_handlers(self):
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()
        self.logger.setLevel(logging.NOTSET)

    def load(self, handlers: str):
        path = os.path.join(self.directory.name, 'experiment.conf')
        with open(path, 'w', encoding='utf-8') as config_file:
            config_file.write(EXPERIMENT + '\n<logging>\n' + handlers + '</logging>\n')
        config, _ = load_config(path)
        return config.logging

    def test_console_and_file(self):
        logging_config = self.load("""\
    <console>
        level info
        color off
    </console>
    <file {}>
        level debug-epochs
    </file>
""".format(self.log_file))

        logging_config.configure(self.logger)
        console, log_file = self.logger.handlers
        self.assertIsInstance(console, logging.StreamHandler)
        self.assertEqual(console.level, logging.INFO)
        self.assertIsInstance(log_file, logging.handlers.WatchedFileHandler)
        self.assertEqual(log_file.level, DEBUG_EPOCHS)

        # The level of the logger itself is left to its ancestors
        self.logger.setLevel(DEBUG_EPOCHS)
        self.logger.log(DEBUG_EPOCHS, "Epoch 3: loss 0.25")
        log_file.flush()
        with open(self.log_file, encoding='utf-8') as written:
            self.assertIn('[EPOCH] Epoch 3: loss 0.25', written.read())

    def test_verbosity_overrides_console(self):
        logging_config = self.load("    <console>\n        level warning\n    </console>\n")
        logging_config.configure(self.logger, verbosity=3)
        self.assertEqual(self.logger.handlers[0].level, logging.DEBUG)

    def test_file_handler_is_cached(self):
        logging_config = self.load("    <file {}>\n    </file>\n".format(self.log_file))
        logging_config.configure(self.logger)
        first, = self.logger.handlers
        logging_config.configure(self.logger)
        self.assertIs(self.logger.handlers[0], first)
        self.assertEqual(first.level, logging.INFO)

    def test_bad_sections(self):
        missing = os.path.join(self.directory.name, 'missing', 'run.log')
        bad = [
            ("    <console>\n    </console>\n    <console>\n    </console>\n", ValueError, "console multiple times"),
            ("    <console named>\n    </console>\n", ValueError, "cannot have a name"),
            ("    <file {}>\n    </file>\n".format(missing), ValueError, "missing"),
            ("    <file {}>\n        rotate daily\n    </file>\n".format(self.log_file), ConfigurationError,
             "rotate"),
        ]
        for handlers, error, message in bad:
            with self.subTest(message=message):
                with self.assertRaisesRegex(error, message):
                    self.load(handlers)


if __name__ == '__main__':
    unittest.main()
