"""How the error falls with the number of estimation bits.

lam = 1/3 has no finite binary expansion, so every m leaves an error.  The
majority vote over r = 2m + 1 estimations makes it shrink roughly like 2^-m.
Writes error_scaling.svg next to this script.
"""
import math
from pathlib import Path

import numpy as np

from fracpow import AncillaConfig, PowerRequest, SpectralFixture, measure_error
from fracpow.svg import line_plot

f = SpectralFixture.diagonal([0.0, 1 / 3])

ms, logs = [], []
for m in range(3, 9):
    rec = measure_error(f, PowerRequest(0.5, AncillaConfig(m)), n_samples=64, seed=2024)
    ms.append(m)
    logs.append(math.log2(rec.max_err))
    print(f"m={m}  r={rec.r:2d}  max_err={rec.max_err:.3e}  controlled calls={rec.calls_cu + rec.calls_cuinv}")

slope = np.polyfit(ms, logs, 1)[0]
print(f"slope of log2(err) vs m: {slope:.2f}")

out = Path(__file__).with_name("error_scaling.svg")
out.write_text(line_plot(ms, logs, title="lam = 1/3, t = 1/2", xlabel="m", ylabel="log2(max err)"))
print("wrote", out)
