"""Energy-detection sensing math and the perceived-occupancy chain.

A station senses C primary channels per slot. Each channel is perceived
busy with probability q = a*P_d + (1-a)*P_f, and the number of
perceived-busy channels s follows a single-step birth-death chain on
{0..C} whose stationary law is Binomial(C, q).
"""

import math

import numpy as np

from .errors import ParameterError

__all__ = [
    "q_function",
    "inverse_q",
    "false_alarm_from_detection",
    "perceived_busy_probability",
    "spse_transition_matrix",
    "spse_stationary",
    "idle_availability",
]


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ParameterError("q_function: x must be finite")
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def inverse_q(p):
    """Solve Q(x) = p for x, p in (0,1).

    Safeguarded Newton with a bisection bracket, iterated until the
    x-step stalls. Probabilities above one half are reflected through
    Q(-x) = 1 - Q(x); the complement 1 - p is exact there, so the
    solver always works at full relative precision on the small tail.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ParameterError("inverse_q: p must lie in (0,1)")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -inverse_q(1.0 - p)
    lo, hi = 0.0, 40.0  # Q(40) underflows well past any useful p
    x = 1.0
    for _ in range(200):
        qx = q_function(x)
        if qx > p:
            lo = x
        else:
            hi = x
        pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if pdf > 0.0:
            x_new = x + (qx - p) / pdf  # Q'(x) = -pdf(x)
        else:
            x_new = math.inf
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)  # Newton left the bracket
        if abs(x_new - x) <= 1e-13 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def false_alarm_from_detection(p_d, snr_db, t_s, f_s):
    """False-alarm probability of an energy detector pinned to a target
    detection probability.

    Parameters
    ----------
    p_d : target detection probability, in (0,1) exclusive
    snr_db : sensed SNR of the primary signal in dB
    t_s : sensing time per slot, seconds
    f_s : sampling (channel) frequency, Hz

    Returns P_f = Q( Q^-1(P_d)*sqrt(2*gamma+1) + sqrt(t_s*f_s)*gamma )
    with gamma = 10^(snr_db/10), clamped to [0,1].
    """
    p_d = float(p_d)
    if not (0.0 < p_d < 1.0):
        raise ParameterError("false_alarm_from_detection: p_d must lie in (0,1)")
    t_s, f_s = float(t_s), float(f_s)
    if t_s <= 0.0:
        raise ParameterError("false_alarm_from_detection: t_s must be positive")
    if f_s <= 0.0:
        raise ParameterError("false_alarm_from_detection: f_s must be positive")
    if t_s * f_s < 1.0:
        raise ParameterError("false_alarm_from_detection: t_s*f_s must be >= 1 sample")
    gamma = 10.0 ** (float(snr_db) / 10.0)
    arg = inverse_q(p_d) * math.sqrt(2.0 * gamma + 1.0) + math.sqrt(t_s * f_s) * gamma
    return min(1.0, max(0.0, q_function(arg)))


def perceived_busy_probability(a, p_d, p_f):
    """Per-channel perceived-busy probability q = a*P_d + (1-a)*P_f."""
    a, p_d, p_f = float(a), float(p_d), float(p_f)
    for name, v in (("a", a), ("p_d", p_d), ("p_f", p_f)):
        if not (0.0 <= v <= 1.0):
            raise ParameterError(f"perceived_busy_probability: {name} must lie in [0,1]")
    return a * p_d + (1.0 - a) * p_f


def _check_spse_args(channels, q):
    if int(channels) != channels or channels < 1:
        raise ParameterError("channels: must be an integer >= 1")
    if not (0.0 <= q <= 1.0):
        raise ParameterError("q: must lie in [0,1]")
    return int(channels), float(q)


def spse_transition_matrix(channels, q):
    """Row-stochastic (C+1)x(C+1) kernel of the perceived-busy count.

    From s: up to s+1 w.p. q*(C-s)/C, down to s-1 w.p. (1-q)*s/C,
    stay otherwise. At most one channel changes per slot.
    """
    C, q = _check_spse_args(channels, q)
    P = np.zeros((C + 1, C + 1))
    for s in range(C + 1):
        up = q * (C - s) / C
        down = (1.0 - q) * s / C
        if s < C:
            P[s, s + 1] = up
        if s > 0:
            P[s, s - 1] = down
        P[s, s] = 1.0 - up - down
    return P


def spse_stationary(channels, q):
    """Stationary law of the perceived-busy count: Binomial(C, q) pmf."""
    C, q = _check_spse_args(channels, q)
    pmf = np.array([math.comb(C, s) * q**s * (1.0 - q) ** (C - s) for s in range(C + 1)])
    return pmf / pmf.sum()


def idle_availability(channels, q):
    """Probability at least one of C channels is perceived idle: 1 - q^C."""
    C, q = _check_spse_args(channels, q)
    return 1.0 - q**C
