import numpy as np


class BColors:
    """
    # Reference: https://stackoverflow.com/questions/287871/how-do-i-print-colored-text-to-the-terminal
    """
    OKCYAN = '\033[96m'
    OKGREEN = '\033[92m'
    WARNING = '\033[93m'
    FAIL = '\033[91m'
    ENDC = '\033[0m'


class ColoredMsg:
    @staticmethod
    def ok(msg):
        return f"{BColors.OKCYAN}{msg}{BColors.ENDC}"

    @staticmethod
    def warn(msg):
        return f"{BColors.WARNING}{msg}{BColors.ENDC}"

    @staticmethod
    def success(msg):
        return f"{BColors.OKGREEN}{msg}{BColors.ENDC}"

    @staticmethod
    def error(msg):
        return f"{BColors.FAIL}{msg}{BColors.ENDC}"


# ==========================================================================
# ERRORS.
# ==========================================================================
class ConfigError(ValueError):
    """ Invalid configuration: unknown keys, malformed overrides or violated invariants. """
    pass


class DomainError(ValueError):
    """ Operation called outside of its mathematical domain. """
    pass


class ContractViolation(RuntimeError):
    """ A protocol contract was broken by the caller (or by an adversary strategy). """
    pass


# ==========================================================================
# RANDOM STREAMS.
# ==========================================================================
# Stream tags keep independent draws of one run apart.
STREAM_NODE = 1
STREAM_DELAY = 2
STREAM_DRIFT = 3
STREAM_FAULT = 4
STREAM_INIT = 5
STREAM_BAND = 6
STREAM_TRIAL = 7


def make_rng(seed, *stream):
    """
    Returns a numpy Generator for the given seed and stream path.

    :param seed: (int) 64-bit run seed.
    :param stream: (int) Path of non-negative integers naming the stream, e.g. (STREAM_NODE, node_id).
    :return: (numpy.random.Generator)
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, stream)]))


def block_seeds(seed, num_blocks, stream=STREAM_TRIAL):
    """ Spawns one child seed sequence per block of trials. Results do not depend on the worker count. """
    root = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, stream])
    return root.spawn(num_blocks)
