"""Closed-form transmission/collision probabilities and their coupling.

The backoff process contributes the classic saturation attempt
probability; sensing contributes the chance that at least one of the C
channels is perceived idle. Their product is the per-slot transmission
probability, coupled to the conditional collision probability through a
scalar fixed point.
"""

import io
import json
from dataclasses import dataclass

from .errors import ParameterError, SolverError
from .params import ModelParams
from .sensing import idle_availability

DAMPING = 0.5
FP_TOL = 1e-12
FP_MAX_ITER = 10_000

SWEEP_AXES = ("n", "P_d", "a", "C", "W", "m")


def bianchi_tau(p, W, m):
    """Saturation attempt probability of the binary-exponential-backoff
    chain: 2(1-2p) / ((1-2p)(W+1) + p*W*(1-(2p)^m)).

    p is the conditional collision probability at an attempt. The
    removable singularity at p=0.5 is filled with the continuous limit
    4 / (2(W+1) + m*W).
    """
    p = float(p)
    if not (0.0 <= p < 1.0):
        raise ParameterError("p: must lie in [0,1)")
    if int(W) != W or W < 2:
        raise ParameterError("W: must be an integer >= 2")
    if int(m) != m or m < 0:
        raise ParameterError("m: must be an integer >= 0")
    if abs(p - 0.5) < 1e-9:
        return 4.0 / (2.0 * (W + 1) + m * W)
    num = 2.0 * (1.0 - 2.0 * p)
    den = (1.0 - 2.0 * p) * (W + 1) + p * W * (1.0 - (2.0 * p) ** m)
    return num / den


def cross_layer_tau(p, W, m, C, q):
    """Transmission probability: backoff attempt probability times the
    chance at least one sensed channel is perceived idle."""
    return bianchi_tau(p, W, m) * idle_availability(C, q)


def collision_probability(tau, n):
    """Chance >= 1 of the other n-1 stations attempts in the same slot:
    1 - (1-tau)^(n-1). Zero when n=1."""
    tau = float(tau)
    if not (0.0 <= tau <= 1.0):
        raise ParameterError("tau: must lie in [0,1]")
    if int(n) != n or n < 1:
        raise ParameterError("n: must be an integer >= 1")
    return 1.0 - (1.0 - tau) ** (n - 1)


@dataclass(frozen=True)
class OperatingPoint:
    """Converged (tau, p) pair with solver diagnostics."""

    tau: float
    p: float
    iterations: int
    residual: float  # final |delta tau| of the damped iteration


def solve_fixed_point(params: ModelParams) -> OperatingPoint:
    """Solve p = 1-(1-tau(p))^(n-1) by damped iteration.

    Damping 0.5 from p=0, tolerance 1e-12 on |delta p|; bisection
    fallback if the damped loop stalls (monotone residual g guarantees a
    bracketed root for n >= 2).
    """
    q = params.busy_probability
    n, W, m, C = params.n, params.W, params.m, params.C

    def tau_of(p):
        return cross_layer_tau(p, W, m, C, q)

    p = 0.0
    tau_prev = tau_of(p)
    residual = float("inf")
    for it in range(1, FP_MAX_ITER + 1):
        target = collision_probability(tau_prev, n)
        p_new = (1.0 - DAMPING) * p + DAMPING * target
        tau_new = tau_of(p_new)
        delta_p = abs(p_new - p)
        residual = abs(tau_new - tau_prev)
        p, tau_prev = p_new, tau_new
        if delta_p <= FP_TOL:
            return OperatingPoint(tau=tau_prev, p=p, iterations=it, residual=residual)

    # damped loop stalled; bisect g(p) = p - collision(tau(p)) on [0,1)
    def g(x):
        return x - collision_probability(tau_of(x), n)

    lo, hi = 0.0, 1.0 - 1e-12
    if g(lo) > 0.0 or g(hi) < 0.0:
        raise SolverError(
            f"fixed point did not converge after {FP_MAX_ITER} damped iterations "
            f"and no bisection bracket exists (last residual {residual:.3e})")
    for it2 in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13:
            break
    p = 0.5 * (lo + hi)
    tau = tau_of(p)
    return OperatingPoint(tau=tau, p=p, iterations=FP_MAX_ITER + it2 + 1,
                          residual=abs(tau - tau_prev))


# --- parameter sweeps ---------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    tau: float | None
    p_c: float | None
    q: float | None
    iterations: int | None
    error: str | None = None


def _apply_axis(params, axis, value):
    if axis == "n":
        return params.replace(n=int(value))
    if axis == "P_d":
        return params.replace(p_d=float(value))
    if axis == "a":
        return params.replace(a=float(value))
    if axis == "C":
        return params.replace(C=int(value))
    if axis == "W":
        return params.replace(W=int(value))
    if axis == "m":
        return params.replace(m=int(value))
    raise ParameterError(f"axis: must be one of {', '.join(SWEEP_AXES)}")


def sweep(params: ModelParams, axis: str, values) -> list[SweepRow]:
    """One fixed-point solve per axis value, other parameters held.

    Failed points are marked in their row instead of aborting the sweep.
    """
    if axis not in SWEEP_AXES:
        raise ParameterError(f"axis: must be one of {', '.join(SWEEP_AXES)}")
    rows = []
    for value in values:
        try:
            pt_params = _apply_axis(params, axis, value)
            op = solve_fixed_point(pt_params)
            rows.append(SweepRow(axis=axis, value=float(value), tau=op.tau,
                                 p_c=op.p, q=pt_params.busy_probability,
                                 iterations=op.iterations))
        except (ParameterError, SolverError) as exc:
            rows.append(SweepRow(axis=axis, value=float(value), tau=None,
                                 p_c=None, q=None, iterations=None,
                                 error=str(exc)))
    return rows


def _fmt(x):
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("axis,value,tau,p_c,q,iterations\n")
    for r in rows:
        it = "" if r.iterations is None else str(r.iterations)
        buf.write(f"{r.axis},{_fmt(r.value)},{_fmt(r.tau)},{_fmt(r.p_c)},"
                  f"{_fmt(r.q)},{it}\n")
    return buf.getvalue()


def sweep_to_json(rows) -> str:
    payload = []
    for r in rows:
        obj = {"axis": r.axis, "value": r.value, "tau": r.tau, "p_c": r.p_c,
               "q": r.q, "iterations": r.iterations}
        if r.error is not None:
            obj["error"] = r.error
        payload.append(obj)
    return json.dumps(payload, indent=2) + "\n"
