"""Two corrupt parties follow the protocol but feed in enormous inputs.

Honest traffic stays the same however long those inputs get, because the
agreed length bound only trusts lengths that enough parties vouch for.
"""
from fractions import Fraction

from convexagree.convexity import EuclideanRational
from convexagree.protocol import ProtocolConfig, ca_unknown_L, to_wire, unknown_L_rounds
from convexagree.simnet import Network, drive, make_adversary

n, t = 10, 2
space = EuclideanRational(1)
honest = {p: (Fraction(p - 4, 3),) for p in range(8)}
print("honest input lengths:", {p: len(to_wire(space, v)) for p, v in honest.items()})

for exponent in (10, 1_000, 100_000):
    inputs = dict(honest)
    inputs[8] = inputs[9] = (Fraction(2 ** exponent),)
    cfg = ProtocolConfig(n, t, space)
    net = Network(n, seed=1, adversary=make_adversary("follower", [8, 9]), budget=t)
    out = drive(net, ca_unknown_L(net, "ca", cfg, inputs), unknown_L_rounds(n, cfg))
    after = sum(b for k, b in net.bits.items() if not k.startswith("ca/length"))
    dropped = [f["party"] for f in net.flags if f["flag"] == "input-dropped"]
    print(f"corrupt input {len(to_wire(space, inputs[8])):>6} bits: agreed bound {net.context['L_tilde']}, "
          f"dropped {dropped}, output {out[0][0]}, honest bits after length exchange {after}")
