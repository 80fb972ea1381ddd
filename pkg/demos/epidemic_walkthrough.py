"""Finding an epidemic segment when the background level is unknown.

Run with ``python demos/epidemic_walkthrough.py``.
"""

import numpy as np

from epichange import CostParams, build, detect_epidemic, op_fixed_background
from epichange.simgen import ScenarioSpec, default_config, generate

# A series of 750 points: standard normal noise with a block of +3
# between points 226 and 375.
ts, truth = generate(ScenarioSpec("S1", 750, seed=2024))
print("true segment:", truth.signal)

# The scenario defaults use the penalty 3 log(n)^1.1 on the deviance
# scale and allow segments up to half the series.
cfg = default_config("S1", ts.n)
res = detect_epidemic(ts, cfg)
for seg in res.signals:
    print(f"detected ({seg.start}, {seg.end}) with mean {seg.mean:.2f}")
print(f"background estimate {res.theta0:.3f}; the whole-series median is {np.median(ts.values):.3f}")

# The second pass is ordinary optimal partitioning at the final
# background estimate, so freezing it reproduces the answer.
again = op_fixed_background(ts, res.theta0, cfg)
print("second pass reproduced:", again.intervals() == res.intervals())

# The online variant reports the first-pass segmentation directly.
online = detect_epidemic(ts, cfg, online=True)
print("online segments:", online.intervals())

# A hand-made example with explicit parameters on the likelihood scale.
small = build([0, 0, 0, 4, 4, 0, 0, 0, 0, 0])
print("small example:", detect_epidemic(small, CostParams(beta=5.0, max_seg_len=3)).intervals())
