"""
The response rule on a four-node toy network
============================================

A node that receives edges fires with a probability driven by the summed
importance of its senders, normalised by the current maximum importance.
Under polarization the senders of the other parity count negatively.
"""

import numpy as np

from dyncomm.model import EdgeSnapshot, Regime, response_probability, signed_importance_view

importance = np.array([1.0, 2.0, 3.0, 4.0])

# node 3 hears from nodes 1 and 4: (1 + 4) / (1 + 4 * 2)
snapshot = EdgeSnapshot.merge(step=1, n_nodes=4, basal=[(1, 3), (4, 3)])
print("homogeneous, node 3 <- {1, 4}:", response_probability(3, snapshot, importance, Regime.HOMOGENEOUS))

# the even node 2 sees odd senders with a minus sign
print("view of an even receiver:", signed_importance_view(importance, "even"))
snapshot = EdgeSnapshot.merge(step=1, n_nodes=4, basal=[(1, 2), (4, 2)])
print("odd/even, node 2 <- {1, 4}:", response_probability(2, snapshot, importance, Regime.ODD_EVEN))

# two odd senders cancel the even receiver entirely
snapshot = EdgeSnapshot.merge(step=1, n_nodes=4, basal=[(1, 2), (3, 2)])
print("odd/even, node 2 <- {1, 3}:", response_probability(2, snapshot, importance, Regime.ODD_EVEN))
