"""Nine parties agree on a point of a 1024-element line while two of them equivocate.

Prints the per-iteration supernode classification and where the honest bits went.
"""
import random
from collections import Counter

from convexagree import oracles
from convexagree.convexity import Grid1D
from convexagree.protocol import ProtocolConfig, ca_fixed_L, fixed_L_rounds, iteration_audit
from convexagree.simnet import Network, drive, make_adversary

n, t = 9, 2
space = Grid1D(1024)
rng = random.Random(11)
inputs = {p: rng.randrange(1024) for p in range(n)}
corrupt = [2, 7]
cfg = ProtocolConfig(n, t, space, L=10)
net = Network(n, seed=11, adversary=make_adversary("equivocate-in-supersend", corrupt), budget=t)
net.context["extreme_values"] = [space.wire_encode(0), space.wire_encode(1023)]
honest_in = [inputs[p] for p in range(n) if p not in corrupt]


def audit(net, cfg, sn, i, L):
    a = iteration_audit(net, cfg, sn, i, L, honest_in)
    print(f"after iteration {i}: {len(sn)} supernodes, classes {dict(a['classes'])}, "
          f"value bound {L} bits, checks {''.join(k for k in 'ABCDE' if a[k])}")


net.context["audit"] = audit
print("inputs:", inputs, "corrupt:", corrupt)
out = drive(net, ca_fixed_L(net, "ca", cfg, inputs), fixed_L_rounds(n, cfg))
h = net.honest_parties()
print("outputs:", {p: out[p] for p in h})
print("agreement:", oracles.agreement_holds(out, h), " inside honest range:",
      min(honest_in) <= out[h[0]] <= max(honest_in))
print(f"{net.round} rounds (bound {fixed_L_rounds(n, cfg)}), {sum(net.bits.values())} honest bits")
phases = Counter()
for tag, bits in net.bits.items():
    phases["/".join(tag.split("/")[:2])] += bits
for tag, bits in sorted(phases.items()):
    if bits:
        print(f"  {tag:10s} {bits}")
