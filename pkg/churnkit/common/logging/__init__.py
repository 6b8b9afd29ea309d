"""
Common logging component
"""

# Extra log levels
import logging

DEBUG_EPOCHS = 7
DEBUG_STEPS = 5

logging.addLevelName(DEBUG_STEPS, 'STEP')
logging.addLevelName(DEBUG_EPOCHS, 'EPOCH')
