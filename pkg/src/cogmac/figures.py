"""Bundled sweep recipes.

Each preset sweeps the station count n over [2,50] step 2 for a family
of parameter curves and reports one headline metric per preset (the
transmission probability tau or the collision probability p_c).
Detection runs in derived mode: P_f follows from each curve's P_d at
SNR -15 dB, sensing time 2 ms, sampling frequency 6 MHz.
"""

import io
import json
from dataclasses import dataclass

from .analytic import sweep
from .errors import ParameterError
from .params import ModelParams

N_GRID = tuple(range(2, 51, 2))
VALIDATE_N_POINTS = (5, 20, 50)

SNR_DB = -15.0
T_S = 2e-3
F_S = 6e6


@dataclass(frozen=True)
class Preset:
    name: str
    metric: str  # "tau" or "p_c"
    description: str
    curves: tuple  # of (label, ModelParams with n placeholder)


def _params(W=32, m=3, C=1, a=0.5, p_d=0.5):
    return ModelParams(n=2, W=W, m=m, C=C, a=a, p_d=p_d,
                       snr_db=SNR_DB, t_s=T_S, f_s=F_S)


def _fmtnum(x):
    return format(x, "g")


def _detection_window_curves():
    return tuple((f"pd{_fmtnum(pd)}_w{W}", _params(W=W, p_d=pd))
                 for pd in (0.1, 0.5, 0.9) for W in (32, 64))


def _detection_stage_curves():
    return tuple((f"pd{_fmtnum(pd)}_m{m}", _params(m=m, p_d=pd))
                 for pd in (0.1, 0.5, 0.9) for m in (3, 5))


def _activity_channel_curves():
    return tuple((f"a{_fmtnum(a)}_c{C}", _params(a=a, C=C))
                 for a in (0.0, 0.5, 0.8) for C in (1, 3, 6))


_PRESETS = {
    "fig3": Preset("fig3", "tau",
                   "tau vs n; curves P_d in {0.1,0.5,0.9} x W in {32,64}, m=3, C=1, a=0.5",
                   _detection_window_curves()),
    "fig4": Preset("fig4", "p_c",
                   "p_c vs n; curves P_d in {0.1,0.5,0.9} x W in {32,64}, m=3, C=1, a=0.5",
                   _detection_window_curves()),
    "fig5": Preset("fig5", "tau",
                   "tau vs n; curves P_d in {0.1,0.5,0.9} x m in {3,5}, W=32, C=1, a=0.5",
                   _detection_stage_curves()),
    "fig6": Preset("fig6", "p_c",
                   "p_c vs n; curves P_d in {0.1,0.5,0.9} x m in {3,5}, W=32, C=1, a=0.5",
                   _detection_stage_curves()),
    "fig7": Preset("fig7", "tau",
                   "tau vs n; curves a in {0,0.5,0.8} x C in {1,3,6}, P_d=0.5, W=32, m=3",
                   _activity_channel_curves()),
    "fig8": Preset("fig8", "p_c",
                   "p_c vs n; curves a in {0,0.5,0.8} x C in {1,3,6}, P_d=0.5, W=32, m=3",
                   _activity_channel_curves()),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def figure_preset(name) -> Preset:
    if name not in _PRESETS:
        raise ParameterError(f"preset: unknown name {name!r}; "
                             f"choose from {', '.join(PRESET_NAMES)}")
    return _PRESETS[name]


def preset_table(preset: Preset, n_values=N_GRID):
    """Wide table: first column n, one metric column per curve.

    Returns (header, rows); failed points surface as None cells.
    """
    header = ["n"] + [f"{'tau' if preset.metric == 'tau' else 'pc'}_{label}"
                      for label, _ in preset.curves]
    columns = []
    for _, base in preset.curves:
        rows = sweep(base, "n", n_values)
        pick = (lambda r: r.tau) if preset.metric == "tau" else (lambda r: r.p_c)
        columns.append([pick(r) for r in rows])
    table_rows = [[float(nv)] + [col[i] for col in columns]
                  for i, nv in enumerate(n_values)]
    return header, table_rows


def preset_table_to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        cells = [format(row[0], ".17g")]
        cells += ["nan" if v is None else format(v, ".17g") for v in row[1:]]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def preset_table_to_json(header, rows) -> str:
    payload = [{key: row[i] for i, key in enumerate(header)} for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def preset_validation_points(preset: Preset, n_values=VALIDATE_N_POINTS):
    """(label, params) pairs covering each curve at a few station counts."""
    return [(f"{label},n={nv}", base.replace(n=int(nv)))
            for label, base in preset.curves for nv in n_values]
