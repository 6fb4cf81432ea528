"""Slot-synchronous Monte Carlo simulator for n saturated stations.

Each station runs CSMA/CA with binary exponential backoff gated by
imperfect sensing of C primary channels. Per slot: true occupancy
advances, each channel is perceived busy w.p. P_d (truly busy) or P_f
(truly idle), stations with >= 1 perceived-idle channel count down or
transmit at timer 0, stations seeing all-busy freeze. Same-slot
overlap with another station's attempt (any channel) escalates the
backoff stage; successes reset to stage 0. Hitting a truly-busy channel
is tallied separately and does not escalate unless pu_hits_collide is
set.

sensing_scope:
  per-station (default) — every station senses an independent
    realization of the primary environment, which is the independence
    the analytic chain assumes per station; use this to validate the
    closed forms.
  global — all stations share one occupancy/perception draw per slot.
    Shared freezes synchronize attempts, so collision rates exceed the
    decoupled closed form noticeably; kept as a robustness probe.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy import stats as _sps

from .errors import ParameterError
from .params import ModelParams

RNG_NAME = "pcg64"
DEFAULT_WARMUP = 10_000
N_BATCHES = 20
BLOCK_SLOTS = 4096

SENSING_SCOPES = ("per-station", "global")


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    slots: int
    seed: int
    warmup_slots: int = DEFAULT_WARMUP
    sensing_scope: str = "per-station"
    channel_pick: str = "uniform-idle"
    pu_hits_collide: bool = False

    def __post_init__(self):
        if int(self.slots) != self.slots or self.slots < 1:
            raise ParameterError("slots: must be an integer >= 1")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ParameterError("seed: must be a 64-bit unsigned integer")
        if int(self.warmup_slots) != self.warmup_slots or self.warmup_slots < 0:
            raise ParameterError("warmup: must be an integer >= 0")
        if self.warmup_slots >= self.slots:
            raise ParameterError("warmup: must be smaller than slots")
        if self.sensing_scope not in SENSING_SCOPES:
            raise ParameterError(
                f"sensing_scope: must be one of {', '.join(SENSING_SCOPES)}")
        if self.channel_pick != "uniform-idle":
            raise ParameterError("channel_pick: only uniform-idle is implemented")


@dataclass(frozen=True)
class SimStats:
    tau_hat: float
    pc_hat_any: float
    pc_hat_same_channel: float
    pu_collision_rate: float
    attempts: int
    ci95_tau: float
    ci95_pc: float
    slots: int
    warmup_slots: int
    batches: int
    seed: int
    rng: str = RNG_NAME


def _occupancy_blocks_bd(picks, resample, carry):
    """Forward-fill single-channel resampling events into (B,K,C) states.

    picks (B,K): channel resampled that slot; resample (B,K): its new
    busy flag; carry (K,C): state entering the block.
    """
    B, K = picks.shape
    C = carry.shape[1]
    tcol = np.arange(B, dtype=np.int32)[:, None, None]
    idx = np.where(picks[:, :, None] == np.arange(C)[None, None, :], tcol,
                   np.int32(-1))
    np.maximum.accumulate(idx, axis=0, out=idx)
    gathered = resample[idx.clip(min=0), np.arange(K)[None, :, None]]
    return np.where(idx >= 0, gathered, carry[None, :, :])


def run_simulation(config: SimConfig) -> SimStats:
    """Run the slot loop; deterministic for a fixed config (PCG64)."""
    p = config.params
    n, W, m, C = p.n, p.W, p.m, p.C
    a, p_d, p_f = p.a, p.p_d, p.false_alarm
    birth_death = p.sensing_dynamics == "birth-death"
    per_station = config.sensing_scope == "per-station"
    K = n if per_station else 1
    slots, warmup = config.slots, config.warmup_slots
    span = slots - warmup
    nb = min(N_BATCHES, span)

    rng = np.random.Generator(np.random.PCG64(config.seed))
    stage = np.zeros(n, dtype=np.int64)
    timer = rng.integers(0, W, size=n)
    true_state = rng.random((K, C)) < a

    attempts = 0
    coll_any = 0
    coll_same = 0
    pu_hits = 0
    batch_att = np.zeros(nb, dtype=np.int64)
    batch_coll = np.zeros(nb, dtype=np.int64)

    for block_start in range(0, slots, BLOCK_SLOTS):
        B = min(BLOCK_SLOTS, slots - block_start)
        if birth_death:
            picks = rng.integers(0, C, size=(B, K))
            resample = rng.random((B, K)) < a
            true_blk = _occupancy_blocks_bd(picks, resample, true_state)
            true_state = true_blk[-1].copy()
        else:
            true_blk = rng.random((B, K, C)) < a
        perc = rng.random((B, K, C))
        busy_blk = np.where(true_blk, perc < p_d, perc < p_f)
        idle_any_blk = ~busy_blk.all(axis=2)

        for trel in range(B):
            t = block_start + trel
            if per_station:
                active = idle_any_blk[trel]
            else:
                if not idle_any_blk[trel, 0]:
                    continue  # everyone frozen this slot
                active = None  # all stations move
            if active is None:
                att = timer == 0
                timer -= ~att
            else:
                att = active & (timer == 0)
                timer -= active & (timer > 0)
            att_idx = np.flatnonzero(att)
            na = att_idx.size
            if na == 0:
                continue

            busy_row = busy_blk[trel]
            if C == 1:
                ch = np.zeros(na, dtype=np.int64)
            elif per_station:
                ch = np.empty(na, dtype=np.int64)
                for x, j in enumerate(att_idx):
                    idle_ch = np.flatnonzero(~busy_row[j])
                    ch[x] = idle_ch[rng.integers(idle_ch.size)]
            else:
                idle_ch = np.flatnonzero(~busy_row[0])
                ch = idle_ch[rng.integers(0, idle_ch.size, size=na)]

            true_row = true_blk[trel]
            pu_hit = true_row[att_idx if per_station else np.zeros(na, int), ch]
            sn_coll = na >= 2
            escalate = np.full(na, sn_coll)
            if config.pu_hits_collide:
                escalate |= pu_hit

            if t >= warmup:
                attempts += na
                pu_hits += int(pu_hit.sum())
                bi = (t - warmup) * nb // span
                batch_att[bi] += na
                if sn_coll:
                    coll_any += na
                    counts = np.bincount(ch, minlength=C)
                    coll_same += int((counts[ch] >= 2).sum())
                    batch_coll[bi] += na

            new_stage = np.where(escalate, np.minimum(stage[att_idx] + 1, m), 0)
            stage[att_idx] = new_stage
            timer[att_idx] = rng.integers(0, W << new_stage)

    span_pairs = n * span
    tau_hat = attempts / span_pairs
    pc_any = coll_any / attempts if attempts else 0.0
    pc_same = coll_same / attempts if attempts else 0.0
    pu_rate = pu_hits / attempts if attempts else 0.0

    # batch means; batch b covers slots [ceil(b*span/nb), ceil((b+1)*span/nb))
    bounds = -(-np.arange(nb + 1) * span // nb)
    batch_len = np.diff(bounds)
    ci95_tau = 0.0
    ci95_pc = 0.0
    if nb >= 2:
        tcrit = float(_sps.t.ppf(0.975, nb - 1))
        tau_b = batch_att / (n * batch_len)
        ci95_tau = tcrit * float(np.std(tau_b, ddof=1)) / np.sqrt(nb)
        nonempty = batch_att > 0
        if nonempty.sum() >= 2:
            pc_b = batch_coll[nonempty] / batch_att[nonempty]
            kb = int(nonempty.sum())
            tcrit_pc = float(_sps.t.ppf(0.975, kb - 1))
            ci95_pc = tcrit_pc * float(np.std(pc_b, ddof=1)) / np.sqrt(kb)

    return SimStats(tau_hat=tau_hat, pc_hat_any=pc_any, pc_hat_same_channel=pc_same,
                    pu_collision_rate=pu_rate, attempts=int(attempts),
                    ci95_tau=float(ci95_tau), ci95_pc=float(ci95_pc),
                    slots=slots, warmup_slots=warmup, batches=int(nb),
                    seed=config.seed)


def stats_to_json(stats: SimStats, config: SimConfig) -> str:
    """Stable-key-order JSON with config echo and RNG identification."""
    payload = {
        "stats": {
            "tau_hat": stats.tau_hat,
            "pc_hat_any": stats.pc_hat_any,
            "pc_hat_same_channel": stats.pc_hat_same_channel,
            "pu_collision_rate": stats.pu_collision_rate,
            "attempts": stats.attempts,
            "ci95_tau": stats.ci95_tau,
            "ci95_pc": stats.ci95_pc,
        },
        "config": {
            **{k: v for k, v in config.params.to_key_values().items()},
            "slots": config.slots,
            "warmup": config.warmup_slots,
            "sensing_scope": config.sensing_scope,
            "channel_pick": config.channel_pick,
            "pu_hits_collide": config.pu_hits_collide,
        },
        "meta": {
            "seed": stats.seed,
            "rng": stats.rng,
            "batches": stats.batches,
        },
    }
    return json.dumps(payload, indent=2) + "\n"


@dataclass(frozen=True)
class ValidationRow:
    metric: str
    analytic: float
    simulated: float
    rel_err: float
    passed: bool | None  # None = reported without a pass/fail policy


def validate(params: ModelParams, slots, seed, warmup=DEFAULT_WARMUP,
             sensing_scope="per-station", threshold=0.03):
    """Compare simulation against the closed-form operating point.

    tau is thresholded always; pc_any only at C=1 (the closed form
    ignores channel dispersion, so at C>1 collision metrics are
    reported without pass/fail).
    """
    from .analytic import solve_fixed_point

    op = solve_fixed_point(params)
    cfg = SimConfig(params=params, slots=slots, seed=seed, warmup_slots=warmup,
                    sensing_scope=sensing_scope)
    st = run_simulation(cfg)

    rows = []
    tau_rel = abs(st.tau_hat - op.tau) / max(op.tau, 1e-12) if op.tau or st.tau_hat else 0.0
    rows.append(ValidationRow("tau", op.tau, st.tau_hat, tau_rel,
                              tau_rel <= threshold))
    pc_rel = abs(st.pc_hat_any - op.p) / max(op.p, 1e-3)
    rows.append(ValidationRow("pc_any", op.p, st.pc_hat_any, pc_rel,
                              (pc_rel <= threshold) if params.C == 1 else None))
    same_rel = abs(st.pc_hat_same_channel - op.p) / max(op.p, 1e-3)
    rows.append(ValidationRow("pc_same_channel", op.p, st.pc_hat_same_channel,
                              same_rel, None))
    return rows, st


def validation_rows_to_csv(rows) -> str:
    lines = ["metric,analytic,simulated,rel_err,pass"]
    for r in rows:
        flag = "" if r.passed is None else str(r.passed).lower()
        lines.append(f"{r.metric},{format(r.analytic, '.17g')},"
                     f"{format(r.simulated, '.17g')},{format(r.rel_err, '.17g')},{flag}")
    return "\n".join(lines) + "\n"
