"""Curvature of the chart metric against the space-form closed form.

Samples random points and orthonormal frames, contracts the chart Riemann
tensor into each frame and compares with the model tensor built from the
frame's J matrix. Then prints the adapted-frame scalars as functions of the
Kahler angle.
"""

import numpy as np

from smcflab.ambient import model_curvature, riemann_chart
from smcflab.frames import frame_curvature_scalars, w_components, w_norm_sq
from smcflab.suites import random_frames

k = 1.0
rng = np.random.default_rng(7)
p, E, jmat = random_frames(rng, 50, k)

R = riemann_chart(p, k)
R_frame = np.einsum("nijlm,nia,njb,nlc,nmd->nabcd", R, E, E, E, E)
err = np.abs(R_frame - model_curvature(jmat, k)).max()
print(f"max |R_chart - R_model| over 50 frames: {err:.2e}")

x = jmat[:, 0, 1]
K1212, K3434, K1234 = frame_curvature_scalars(x, k)
Rm = model_curvature(jmat, k)
print(f"K1212 error {np.abs(Rm[:, 0, 1, 0, 1] - K1212).max():.1e}, "
      f"K1234 error {np.abs(Rm[:, 0, 1, 2, 3] - K1234).max():.1e}")

w = w_components(jmat, k)
print(f"|w|^2 error {np.abs(np.sum(w * w, axis=(1, 2)) - w_norm_sq(x, k)).max():.1e}")

for c in (1.0, np.sqrt(30) / 6, 0.5, 0.0):
    s = frame_curvature_scalars(c, k)
    print(f"cos a = {c:.4f}:  K1212 = K3434 = {s.K1212:.4f}  K1234 = {s.K1234:+.4f}  |w|^2 = {w_norm_sq(c, k):.4f}")
