"""Monte Carlo protocol runs, honest and attacked.

Runs the full pulse-by-pulse pipeline — state preparation, optional
interception, lossy transmission, measurement in a random basis,
sifting — and compares against the analytic yield.  The attacked run
sits just below the critical transmission, where the eavesdropper
matches the honest detection statistics while knowing every sifted bit.
"""

from __future__ import annotations

import math

from fockqkd.attack import (
    CONCLUSIVE_ATTACK,
    ChannelModel,
    ProtocolConfig,
    critical_transmission,
    honest_yield,
    run_protocol_monte_carlo,
)
from fockqkd.sources import SourceParams


def show(tag, rep, expected=None):
    line = (f"{tag:<26} yield={rep.detection_yield:.6f}  "
            f"qber={rep.qber:.5f}  sifted={rep.sifted_bits}  "
            f"eve_known={rep.eve_known_fraction_of_sifted:.2f}")
    if expected is not None:
        line += f"  (analytic {expected:.6f})"
    if rep.attack_unavailable:
        line += "  [attack unavailable]"
    print(line)


N = 200_000

wcp = SourceParams(kind="wcp", amplitude=math.sqrt(0.1))
pdc = SourceParams(kind="pdc", amplitude=0.1)

print(f"{N} pulses per run; seeds fixed for reproducibility\n")

print("-- honest runs at moderate loss (t = 0.5) --")
for tag, src, seed in (("weak pulse", wcp, 11), ("pair source", pdc, 12)):
    cfg = ProtocolConfig(source=src, channel=ChannelModel(0.5),
                         n_pulses=N, seed=seed)
    rep = run_protocol_monte_carlo(cfg)
    show(tag, rep, expected=honest_yield(src, ChannelModel(0.5)))
print()

t_star = critical_transmission(wcp)
t_attack = 0.5 * t_star
print(f"-- attacked runs at t = 0.5 t* = {t_attack:.3e} --")
cfg = ProtocolConfig(source=wcp, channel=ChannelModel(t_attack),
                     n_pulses=N, seed=21)
show("weak pulse, honest", run_protocol_monte_carlo(cfg),
     expected=honest_yield(wcp, ChannelModel(t_attack)))
rep = run_protocol_monte_carlo(cfg, CONCLUSIVE_ATTACK)
show("weak pulse, attacked", rep)
print(f"   eve conclusive on {rep.eve_conclusive_count} pulses; "
      f"the yield beats honest with zero induced error.")
print()

print("-- the same attack against the pair source (t = 0.5) --")
cfg = ProtocolConfig(source=pdc, channel=ChannelModel(0.5),
                     n_pulses=N, seed=31)
rep = run_protocol_monte_carlo(cfg, CONCLUSIVE_ATTACK)
show("pair source, attacked", rep)
print("   the measurement does not exist, so the run degrades to "
      "honest dynamics and the report flags it.")
