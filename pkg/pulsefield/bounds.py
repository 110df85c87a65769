"""
pulsefield: bounds.py

Analysis-bound calculators. None of these quantities is a runtime input of the protocol; they are
used by the statistical tests and to derive the simulator's default precision target.
"""

import math

from pulsefield.util import DomainError


def drift_error(rho, tau):
    """
    Per-node phasor error accumulated by a non-adjusting node over `tau` cycles under drift `rho`.

    :return: (float) rho * (tau + 1 / (1 - rho)).
    """
    return rho * (tau + 1.0 / (1.0 - rho))


def one_kick_radius(alpha, n, f, rho, tau):
    """ Strength reached by the one-kick field with probability at least e^{-alpha}. """
    return math.sqrt(alpha * (n - f)) - n * drift_error(rho, tau)


def one_kick_error(n, rho, d, omega):
    """ Measurement error of an authenticated omega-window without faulty pulses. """
    return (1.0 + rho) * n * (drift_error(rho, omega / (1.0 - rho) + d) + d)


def one_kick_sync_bound(eps0, f, beta, n, rho, dt, omega):
    """
    Sine of the worst sync-phase disagreement of two nodes measuring the one-kick field
    `dt` cycles apart.

    :raises DomainError: Unless f > 0 and beta > 3.
    """
    if f <= 0 or beta <= 3:
        raise DomainError(f"one_kick_sync_bound needs f > 0 and beta > 3 (got f={f}, beta={beta}).")
    return 2.0 * eps0 / (f * (beta - 1.0)) + n * drift_error(rho, dt + omega / (1.0 - rho))


def min_cycle_gap(rho):
    """ Every node pulses at least once in any interval of this length. """
    return 3.0 / (2.0 * (1.0 - rho))


def walk_radius(alpha, n, f, rho, tau, omega):
    """ Strength of the random-walk field over one window with probability at least e^{-alpha}. """
    pulses = math.floor(2.0 * (omega / (1.0 + rho) - tau) * (1.0 - rho) / 3.0)
    return math.sqrt(alpha * (n - f) * max(pulses, 0))


def walk_gamma_bound(n, rho, tau, r):
    """ Bound on the nested-interval ratio when the shared part has strength at least `r`. """
    if r <= 0:
        raise DomainError(f"walk_gamma_bound requires r > 0 (got {r}).")
    return (4.0 * n * (1.0 + rho) * tau + 2.0 * n) / r


def interference_bound(n, f, rho, d, omega, sigma):
    """
    Total measurement error of the anonymous omega-window.

    :param sigma: (float) Malignity index in [0, 1]: 1 for Byzantine faults without over-frequent pulses.
    """
    if not 0 <= sigma <= 1:
        raise DomainError(f"Malignity index must lie in [0, 1] (got {sigma}).")
    eps0 = one_kick_error(n, rho, d, omega)
    return (2.0 * (1.0 + rho) * omega * (eps0 + f)) ** sigma \
        + 2.0 * n * (1.0 + rho) * min_cycle_gap(rho) + 2.0 * omega * n * d


def walk_sync_bound(eps, rho, omega, r):
    """ Sine of the worst angle disagreement of two random-walk measurements with strength `r` and error `eps`. """
    if r <= eps:
        raise DomainError(f"walk_sync_bound requires r > eps (got r={r}, eps={eps}).")
    return (2.0 * eps + 2.0 * rho * omega / (1.0 - rho)) / (r - eps)


def precision_estimate(eps, N):
    """ Approximate normalized precision reached when N aligned records are measured with error `eps`. """
    return math.asin(min(1.0, 2.0 * eps / N)) / (2.0 * math.pi)


def frequency_cap(rho, tau):
    """ Maximum number of pulses one node may generate in any interval of `tau` cycles. """
    return 2.0 * (1.0 + rho) * tau + 1.0
