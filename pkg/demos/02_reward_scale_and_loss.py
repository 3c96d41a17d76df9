"""
How the balanced reward interacts with the regression loss
==========================================================

With a discount of zero every transition is a one-step bandit problem: the
Q-value of an action is just the expected reward for taking it on a given
row. The balanced scheme pays +-lambda on FAILURE rows (lambda is the
normal/failure ratio, about 198 for Device-1) and +-1 on NORMAL rows.

This script asks where a network that has converged would put its decision
boundary, in a region of feature space where a fraction ``p`` of the rows
are failures. The answer depends on the loss used for the TD regression.
"""

import numpy as np

from rlsurv import nn
from rlsurv.env import reward_for

lam = 8717 / 44
print(f"lambda = {lam:.2f}")

# Targets seen by each action in a region with failure rate p.
def targets(action):
    return np.array([reward_for(action, 0, "balanced", lam), reward_for(action, 1, "balanced", lam)])


def fitted_value(action, p, loss):
    """Constant prediction minimising the expected loss (grid search)."""
    grid = np.linspace(-lam - 1, lam + 1, 40001)
    t0, t1 = targets(action)
    if loss == "mse":
        risk = (1 - p) * (grid - t0) ** 2 + p * (grid - t1) ** 2
    else:
        h = lambda d: np.where(np.abs(d) <= 1, 0.5 * d * d, np.abs(d) - 0.5)
        risk = (1 - p) * h(grid - t0) + p * h(grid - t1)
    return grid[np.argmin(risk)]


###############################################################################
# Squared error fits the conditional mean, so the agent flags a region as
# soon as p * lambda outweighs (1 - p), i.e. p > 1 / (1 + lambda).
# Huber with delta = 1 fits something close to a median: the huge failure
# targets contribute a clipped gradient of 1 each, the same pull as a normal
# row. The boundary then sits near p = 0.5, as it would for unweighted labels.

for loss in ("mse", "huber"):
    flips = None
    for p in np.linspace(0.0, 1.0, 2001):
        if fitted_value(1, p, loss) > fitted_value(0, p, loss):
            flips = p
            break
    print(f"{loss:>5}: greedy action switches to FAILURE at p ~ {flips:.4f}")
print(f"reference 1/(1+lambda) = {1 / (1 + lam):.4f}")

###############################################################################
# The same effect at the level of one gradient step: the per-sample
# gradient magnitude is capped at 1/B under Huber.

pred = np.zeros(2)
tgt = np.array([1.0, lam])
for name, fn in (("mse", nn.mse_loss_and_grad), ("huber", nn.huber_loss_and_grad)):
    _, g = fn(pred, tgt)
    print(f"{name:>5} gradient for targets (1, {lam:.0f}): {np.round(g, 3)}")

###############################################################################
# So with the default Huber loss the class balance comes mostly from what the
# network can interpolate, not from the equilibrium: pure failure clusters
# are pushed to Q(FAILURE) - Q(NORMAL) of about 2 * lambda, which widens the
# region the agent flags around the few failures it saw in training.
# ``AgentConfig(loss="mse")`` switches to the mean-seeking fit.
