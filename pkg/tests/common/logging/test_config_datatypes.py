"""
Test the datatypes of the logging configuration
"""
import logging
import unittest

from churnkit.common.logging import DEBUG_EPOCHS, DEBUG_STEPS
from churnkit.common.logging.config_datatypes import logging_level


class LoggingLevelTestCase(unittest.TestCase):
    def test_valid(self):
        valid = [
            ('critical', logging.CRITICAL),
            ('Warn', logging.WARNING),
            ('info', logging.INFO),
            ('DEBUG', logging.DEBUG),
            ('debug-epochs', DEBUG_EPOCHS),
            ('debug_steps', DEBUG_STEPS),
            ('notset', logging.NOTSET),
        ]
        for value, level in valid:
            with self.subTest(value=value):
                self.assertEqual(logging_level(value), level)

    def test_invalid(self):
        with self.assertRaisesRegex(ValueError, "'chatty' is not a valid log level"):
            logging_level('chatty')

    def test_level_names(self):
        self.assertEqual(logging.getLevelName(DEBUG_EPOCHS), 'EPOCH')
        self.assertEqual(logging.getLevelName(DEBUG_STEPS), 'STEP')
        self.assertTrue(logging.DEBUG > DEBUG_EPOCHS > DEBUG_STEPS)


if __name__ == '__main__':
    unittest.main()
