"""Joint backoff/sensing chain: state enumeration, transition matrix,
stationary solve.

State (i, k, s): backoff stage i in [0,m], backoff timer k in
[0, W_i - 1] with W_i = 2^i * W, perceived-busy channel count s in
[0, C]. Per slot the sensing coordinate moves first (birth-death
kernel); the backoff move is conditioned on the landing sensing state
u: countdown/attempt when u <= C-1, frozen when u = C.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ParameterError, SolverError
from .params import ModelParams

DEFAULT_STATE_CAP = 5_000_000
DENSE_SOLVE_LIMIT = 2048  # direct dense solve below this; power iteration above


class ChainState(NamedTuple):
    i: int
    k: int
    s: int


class StateLayout:
    """Lexicographic (i, k, s) enumeration with index/state bijections."""

    def __init__(self, W, m, C, cap=DEFAULT_STATE_CAP):
        if int(W) != W or W < 2:
            raise ParameterError("W: must be an integer >= 2")
        if int(m) != m or m < 0:
            raise ParameterError("m: must be an integer >= 0")
        if int(C) != C or C < 1:
            raise ParameterError("C: must be an integer >= 1")
        self.W, self.m, self.C = int(W), int(m), int(C)
        self.windows = [self.W << i for i in range(self.m + 1)]
        size = (self.C + 1) * self.W * (2 ** (self.m + 1) - 1)
        if size > cap:
            raise CapacityError(
                f"state count {size} exceeds cap {int(cap)} (W={W}, m={m}, C={C})")
        self.size = size
        # stage i block starts at (C+1) * W * (2^i - 1)
        self._stage_base = [(self.C + 1) * self.W * ((1 << i) - 1)
                            for i in range(self.m + 1)]

    def index(self, i, k, s):
        return self._stage_base[i] + k * (self.C + 1) + s

    def state(self, idx):
        for i in range(self.m, -1, -1):
            if idx >= self._stage_base[i]:
                rem = idx - self._stage_base[i]
                return ChainState(i, rem // (self.C + 1), rem % (self.C + 1))
        raise IndexError(idx)

    def all_states(self):
        return [ChainState(i, k, s)
                for i in range(self.m + 1)
                for k in range(self.windows[i])
                for s in range(self.C + 1)]


def enumerate_states(W, m, C, cap=DEFAULT_STATE_CAP):
    """Ordered state list; length (C+1)*W*(2^(m+1)-1)."""
    return StateLayout(W, m, C, cap=cap).all_states()


@dataclass(frozen=True)
class TransitionMatrix:
    layout: StateLayout
    probs: sp.csr_matrix  # row-stochastic


def build_transition_matrix(params: ModelParams, p_cond) -> TransitionMatrix:
    """Slot kernel over (i, k, s) for a given conditional collision
    probability p_cond at transmission attempts."""
    p_cond = float(p_cond)
    if not (0.0 <= p_cond <= 1.0):
        raise ParameterError("p_cond: must lie in [0,1]")
    q = params.busy_probability
    lay = StateLayout(params.W, params.m, params.C)
    W, m, C = lay.W, lay.m, lay.C

    rows, cols, vals = [], [], []

    def bd_moves(s):
        up = q * (C - s) / C
        down = (1.0 - q) * s / C
        moves = []
        if s > 0 and down > 0.0:
            moves.append((s - 1, down))
        stay = 1.0 - up - down
        if stay > 0.0:
            moves.append((s, stay))
        if s < C and up > 0.0:
            moves.append((s + 1, up))
        return moves

    for i in range(m + 1):
        wi = lay.windows[i]
        j = min(i + 1, m)
        wj = lay.windows[j]
        succ_targets = np.arange(W) * (C + 1) + lay._stage_base[0]
        coll_targets = np.arange(wj) * (C + 1) + lay._stage_base[j]
        for k in range(wi):
            for s in range(C + 1):
                row = lay.index(i, k, s)
                for u, pu in bd_moves(s):
                    if k >= 1:
                        # countdown on an idle-available slot, frozen otherwise
                        dest_k = k - 1 if u <= C - 1 else k
                        rows.append(row)
                        cols.append(lay.index(i, dest_k, u))
                        vals.append(pu)
                    elif u == C:
                        # timer expired but all channels perceived busy
                        rows.append(row)
                        cols.append(lay.index(i, 0, C))
                        vals.append(pu)
                    else:
                        # transmission: uniform reset to stage 0 on success,
                        # stage min(i+1, m) on collision
                        if p_cond < 1.0:
                            w = pu * (1.0 - p_cond) / W
                            rows.extend([row] * W)
                            cols.extend((succ_targets + u).tolist())
                            vals.extend([w] * W)
                        if p_cond > 0.0:
                            w = pu * p_cond / wj
                            rows.extend([row] * wj)
                            cols.extend((coll_targets + u).tolist())
                            vals.extend([w] * wj)

    probs = sp.coo_matrix((vals, (rows, cols)), shape=(lay.size, lay.size)).tocsr()
    probs.sum_duplicates()
    return TransitionMatrix(layout=lay, probs=probs)


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    residual: float  # max-norm of pi*P - pi
    iterations: int
    method: str


def _as_csr(matrix):
    probs = getattr(matrix, "probs", matrix)
    if not sp.issparse(probs):
        probs = sp.csr_matrix(np.asarray(probs, dtype=float))
    return probs.tocsr()


def _direct_solve(probs):
    # replace the last balance equation with the normalization row
    n = probs.shape[0]
    A = probs.toarray().T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(x)) or x.min() < -1e-10:
        return None
    x = np.clip(x, 0.0, None)
    total = x.sum()
    if total <= 0.0:
        return None
    return x / total


def stationary_distribution(matrix, tol=1e-12, max_iter=1_000_000,
                            method="auto") -> StationaryDistribution:
    """Stationary row vector: pi * P = pi, sum(pi) = 1.

    method "auto" uses a dense direct solve for small chains and power
    iteration otherwise (or whenever the direct residual misses tol).
    For boundary q in {0,1} some states are transient; power iteration
    from the uniform vector leaves them with probability ~0.
    """
    probs = _as_csr(matrix)
    n = probs.shape[0]
    if method not in ("auto", "direct", "power"):
        raise ParameterError("method: must be auto, direct or power")

    if method in ("auto", "direct") and n <= DENSE_SOLVE_LIMIT:
        x = _direct_solve(probs)
        if x is not None:
            residual = float(np.max(np.abs(probs.T @ x - x)))
            if residual <= tol:
                return StationaryDistribution(pi=x, residual=residual,
                                              iterations=0, method="direct")
        if method == "direct":
            raise SolverError("direct stationary solve missed the residual target")

    PT = probs.T.tocsr()
    x = np.full(n, 1.0 / n)
    residual = float("inf")
    for it in range(1, int(max_iter) + 1):
        y = PT @ x
        residual = float(np.max(np.abs(y - x)))
        total = y.sum()
        x = y / total if total > 0.0 else y
        if residual <= tol:
            return StationaryDistribution(pi=x, residual=residual,
                                          iterations=it, method="power")
    raise SolverError(
        f"power iteration: residual {residual:.3e} after {int(max_iter)} iterations")


def transmission_probability_full(pi, layout: StateLayout):
    """Stationary probability of an attempt slot: sum of pi over states
    with timer k = 0 and s <= C-1."""
    vec = pi.pi if isinstance(pi, StationaryDistribution) else np.asarray(pi)
    idx = [layout.index(i, 0, s)
           for i in range(layout.m + 1) for s in range(layout.C)]
    return float(vec[idx].sum())


def dump_coordinates(tm: TransitionMatrix, stream):
    """Debug dump: header plus one `row col prob` line per nonzero."""
    stream.write(f"# states={tm.layout.size} ordering=i,k,s\n")
    coo = tm.probs.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        stream.write(f"{r} {c} {format(v, '.17g')}\n")
