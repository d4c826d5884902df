"""
Electoral entropy for a handful of provinces
============================================

Shares in, nats out. The weighted variants scale each share by a party
profile before taking ``-q ln q``; nothing is renormalized afterwards.
"""

import math

from polarproxy import entropy
from polarproxy.data import builtin_weights

# a fragmented and a dominated province
even = [0.25, 0.25, 0.25, 0.25]
dominated = [0.85, 0.05, 0.05, 0.05]
for name, p in (("even", even), ("dominated", dominated)):
    h = entropy.shannon_entropy(p)
    print(f"{name:10s} H = {h:.4f} nats, ENP = {entropy.effective_number_of_parties(p):.2f}")

print("upper bound ln 4 =", round(math.log(4), 4))

# weights for the 2018 presidential race ship with the package
w = builtin_weights(2018)
print(sorted(w.rows)[:3], "...")
