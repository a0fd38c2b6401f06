#!/usr/bin/env python3
"""Independence and synergy are different axes: the XOR gate as a showcase.

Two fair independent bits Z1, Z2 and X = Z1 xor Z2.  The latents carry zero
total correlation (perfectly independent) yet every synergy measure maxes
out at one bit: neither input alone says anything about X, both together
say everything.

Run:  python3 demos/xor_vs_independence.py
"""

import numpy as np

from minsyn import (
    DiscreteJoint,
    ci_decoder_distribution,
    discrete_ci_synergy,
    discrete_wms_synergy,
    mutual_information,
    total_correlation,
)

LN2 = np.log(2.0)


def main():
    xor = DiscreteJoint.xor()
    print("joint table (z1, z2, x) -> p:")
    print(xor.to_text())

    print(f"I(Z1;X)      = {mutual_information(xor, [0]):.6f} nats")
    print(f"I(Z2;X)      = {mutual_information(xor, [1]):.6f} nats")
    print(f"I(Z1,Z2;X)   = {mutual_information(xor, [0, 1]):.6f} nats = ln 2")
    print(f"TC(Z1,Z2)    = {total_correlation(xor):.6f}  (independent latents)")
    print()
    print(f"whole-minus-sum synergy = {discrete_wms_synergy(xor):.6f} nats")
    print(f"correlational synergy   = {discrete_ci_synergy(xor):.6f} nats "
          f"({discrete_ci_synergy(xor) / LN2:.3f} bits)")
    print()

    table = ci_decoder_distribution(xor)
    print("factorized-model posterior p_ci(x=1 | z): ")
    for z1 in (0, 1):
        for z2 in (0, 1):
            print(f"  z=({z1},{z2}): {table.probs[z1, z2, 1]:.3f}   "
                  f"(true posterior: {float(np.argmax(xor.probs[z1, z2]) == 1):.0f})")
    print("\nthe factorized decoder is blind to XOR: it predicts a coin flip "
          "everywhere, losing the full bit - that loss IS the synergy.")


if __name__ == "__main__":
    main()
