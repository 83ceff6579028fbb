"""Compare the four activation rectifiers on the same feature rows.

Shows the clip regions each method produces for one channel and checks
the reduction laws: with its extra terms switched off, typical-set
refinement collapses to BATS, and LAPS with m = n = 0 does too.
"""

import numpy as np

from tsre import FeatureMatrix, HyperParams, LabelVector
from tsre.rectifiers import (
    bats_apply,
    laps_apply,
    laps_fit,
    react_apply,
    react_fit,
    tsre_apply,
    tsre_fit,
)
from tsre.stats import fit_profile

rng = np.random.default_rng(1)
means = rng.normal(size=(4, 3))
labels = LabelVector(np.arange(200) % 4)
train = FeatureMatrix(means[labels.labels] + rng.gamma(1.0, size=(200, 3)) - 1.0)

params = HyperParams(lambda_base=1.5, omega=2.0, percentile_p=30.0)
profile, _ = fit_profile(train, labels, params)

test = FeatureMatrix(rng.normal(size=(5, 3), scale=4.0))
print("raw test rows:")
print(np.round(test.data, 2))

react = react_fit(train, percentile=90.0)
print(f"\nReAct clip level c = {react.c:.3f}")
print(np.round(react_apply(test, react).data, 2))

print(f"\nBATS interval on channel 0: "
      f"[{profile.mu[0] - 1.5 * profile.sigma[0]:.3f}, "
      f"{profile.mu[0] + 1.5 * profile.sigma[0]:.3f}]")
print(np.round(bats_apply(test, profile.mu, profile.sigma, 1.5).data, 2))

laps = laps_fit(profile.mu, profile.sigma, profile.mu_bar, profile.sigma_bar,
                lam=1.5, m=1.0, n=1.0)
print(f"\nLAPS interval on channel 0: [{laps.lower[0]:.3f}, {laps.upper[0]:.3f}]")
print(np.round(laps_apply(test, laps).data, 2))

ts = tsre_fit(profile, params)
print(f"\nrefined typical set on channel 0: [{ts.lower[0]:.3f}, {ts.upper[0]:.3f}] "
      f"(lambda_0 = {ts.lambda_k[0]:.3f}, skew shift = {-profile.skew[0]:.3f})")
print(np.round(tsre_apply(test, ts).data, 2))

# reduction laws, bitwise
plain = HyperParams(lambda_base=1.5, omega=0.0, enable_activity=False,
                    enable_skew=False)
assert np.array_equal(tsre_apply(test, tsre_fit(profile, plain)).data,
                      bats_apply(test, profile.mu, profile.sigma, 1.5).data)
collapsed = laps_fit(profile.mu, profile.sigma, profile.mu_bar,
                     profile.sigma_bar, lam=1.5, m=0.0, n=0.0)
assert np.array_equal(laps_apply(test, collapsed).data,
                      bats_apply(test, profile.mu, profile.sigma, 1.5).data)
print("\nreduction laws hold bitwise: refined(off) == LAPS(m=n=0) == BATS.")
