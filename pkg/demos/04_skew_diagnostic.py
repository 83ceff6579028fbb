"""Diagnose why symmetric clip intervals misfit skewed channels.

Draws one heavily skewed channel (gamma shape 1), prints a text histogram
against the fitted Gaussian, and shows how the skew-translated typical
set keeps more of the dense region than the symmetric one.
"""

import numpy as np

from tsre import FeatureMatrix, HyperParams, LabelVector
from tsre.rectifiers import tsre_fit
from tsre.stats import fit_profile
from tsre.synth import SynthConfig, generate

config = SynthConfig(seed=5, n_classes=5, n_channels=2, n_id_train=20_000,
                     n_id_test=10, n_ood=10, skew_shape=(1.0, 1.0),
                     class_separation=0.2)
(train, labels), _, _, _ = generate(config)
col = train.data[:, 0]

counts, edges = np.histogram(col, bins=25)
centers = 0.5 * (edges[:-1] + edges[1:])
mu, sigma = col.mean(), col.std()
gauss = np.exp(-0.5 * ((centers - mu) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
gauss_counts = gauss * len(col) * (edges[1] - edges[0])

print(f"channel 0: mean {mu:.3f}, std {sigma:.3f}, "
      f"sample skewness {((col - mu) ** 3).mean() / sigma ** 3:.3f}")
print(f"{'center':>8}  {'data':<32}{'gaussian fit'}")
peak = counts.max()
for c, n, g in zip(centers, counts, gauss_counts):
    bar = "#" * int(30 * n / peak)
    fit = "." * int(30 * g / peak)
    print(f"{c:>8.2f}  {bar:<32}{fit}")

def coverage(lo, hi):
    return np.mean((col >= lo) & (col <= hi))

print("\ntypical set on channel 0, lambda = 1:")
for source in ("prototypes", "train-features"):
    params = HyperParams(skew_source=source)
    profile, _ = fit_profile(train, labels, params)
    sym = tsre_fit(profile, HyperParams(enable_skew=False))
    shifted = tsre_fit(profile, params)
    print(f"  skew source {source:<15} skew_k = {profile.skew[0]:+.3f}")
    print(f"    symmetric    [{sym.lower[0]:7.3f}, {sym.upper[0]:7.3f}] "
          f"covers {coverage(sym.lower[0], sym.upper[0]):6.1%}")
    print(f"    skew-shifted [{shifted.lower[0]:7.3f}, {shifted.upper[0]:7.3f}] "
          f"covers {coverage(shifted.lower[0], shifted.upper[0]):6.1%}")

print("\nthe histogram mode sits left of the mean, so the Gaussian fit")
print("misplaces the dense region. the refinement translates both bounds")
print("down by skew_k: under the default prototype source the class means")
print("are nearly symmetric and the shift stays gentle, while estimating")
print("skew from raw training rows moves the window hard toward the mode")
print("side and trades away right-tail coverage.")
