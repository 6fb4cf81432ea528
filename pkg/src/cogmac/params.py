"""Scenario parameters and their plain-text key=value form."""

from dataclasses import dataclass, fields

from .errors import ParameterError
from .sensing import false_alarm_from_detection, perceived_busy_probability

SENSING_DYNAMICS = ("birth-death", "iid-per-slot")

# canonical config-file keys for the model block
MODEL_KEYS = ("n", "W", "m", "C", "a", "pd", "pf", "snr_db", "ts", "fs",
              "sensing_dynamics")


@dataclass(frozen=True)
class ModelParams:
    """Full scenario description.

    Detection is either explicit (p_f given) or derived (snr_db, t_s and
    f_s given; p_f computed from p_d via the energy-detector relation).
    """

    n: int
    W: int
    m: int
    C: int
    a: float
    p_d: float
    p_f: float | None = None
    snr_db: float | None = None
    t_s: float | None = None
    f_s: float | None = None
    sensing_dynamics: str = "birth-death"

    def __post_init__(self):
        for key in ("n", "W", "m", "C"):
            v = getattr(self, key)
            if int(v) != v:
                raise ParameterError(f"{key}: must be an integer")
            object.__setattr__(self, key, int(v))
        if self.n < 1:
            raise ParameterError("n: must be >= 1")
        if self.W < 2:
            raise ParameterError("W: must be >= 2")
        if self.m < 0:
            raise ParameterError("m: must be >= 0")
        if self.C < 1:
            raise ParameterError("C: must be >= 1")
        if not (0.0 <= self.a <= 1.0):
            raise ParameterError("a: must lie in [0,1]")
        derived = [k for k in ("snr_db", "t_s", "f_s") if getattr(self, k) is not None]
        if self.p_f is not None:
            if derived:
                raise ParameterError("pf: give either pf or snr_db/ts/fs, not both")
            if not (0.0 <= self.p_d <= 1.0):
                raise ParameterError("pd: must lie in [0,1]")
            if not (0.0 <= self.p_f <= 1.0):
                raise ParameterError("pf: must lie in [0,1]")
        else:
            if len(derived) != 3:
                raise ParameterError("pf: missing; derived mode needs snr_db, ts and fs")
            if not (0.0 < self.p_d < 1.0):
                raise ParameterError("pd: must lie in (0,1) when pf is derived")
            # evaluate once up front so bad inputs fail at construction
            pf = false_alarm_from_detection(self.p_d, self.snr_db, self.t_s, self.f_s)
            if not (0.0 <= pf <= 1.0):
                raise ParameterError("pf: derived value outside [0,1]")
        if self.sensing_dynamics not in SENSING_DYNAMICS:
            raise ParameterError(
                f"sensing_dynamics: must be one of {', '.join(SENSING_DYNAMICS)}")

    @property
    def detection_derived(self):
        return self.p_f is None

    @property
    def false_alarm(self):
        """Effective P_f (explicit value or energy-detector derivation)."""
        if self.p_f is not None:
            return self.p_f
        return false_alarm_from_detection(self.p_d, self.snr_db, self.t_s, self.f_s)

    @property
    def busy_probability(self):
        """Per-channel perceived-busy probability q."""
        return perceived_busy_probability(self.a, self.p_d, self.false_alarm)

    def replace(self, **changes):
        kwargs = {f.name: getattr(self, f.name) for f in fields(self)}
        kwargs.update(changes)
        return ModelParams(**kwargs)

    def to_key_values(self):
        """Canonical key=value mapping (strings), derived keys included
        only in the active detection mode."""
        kv = {"n": str(self.n), "W": str(self.W), "m": str(self.m),
              "C": str(self.C), "a": format(self.a, ".17g"),
              "pd": format(self.p_d, ".17g")}
        if self.p_f is not None:
            kv["pf"] = format(self.p_f, ".17g")
        else:
            kv["snr_db"] = format(self.snr_db, ".17g")
            kv["ts"] = format(self.t_s, ".17g")
            kv["fs"] = format(self.f_s, ".17g")
        kv["sensing_dynamics"] = self.sensing_dynamics
        return kv

    def to_config_text(self):
        return "".join(f"{k}={v}\n" for k, v in self.to_key_values().items())


def params_from_key_values(kv):
    """Build ModelParams from a string mapping using the canonical keys."""
    def want(key, conv):
        if key not in kv or kv[key] == "":
            return None
        try:
            return conv(kv[key])
        except ValueError as exc:
            raise ParameterError(f"{key}: {exc}") from None

    unknown = sorted(set(kv) - set(MODEL_KEYS))
    if unknown:
        raise ParameterError(f"{unknown[0]}: unknown parameter key")
    missing = [k for k in ("n", "W", "m", "C", "a", "pd") if k not in kv]
    if missing:
        raise ParameterError(f"{missing[0]}: required parameter missing")
    return ModelParams(
        n=want("n", int), W=want("W", int), m=want("m", int), C=want("C", int),
        a=want("a", float), p_d=want("pd", float), p_f=want("pf", float),
        snr_db=want("snr_db", float), t_s=want("ts", float), f_s=want("fs", float),
        sensing_dynamics=kv.get("sensing_dynamics", "birth-death"),
    )


def parse_key_value_text(text):
    """Parse `key=value` lines; `#` starts a comment; blank lines ignored.

    Returns the raw string mapping. Duplicate keys keep the last value.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
