"""A claimant living in its own process, speaking the line protocol.

It claims to compute the Heaviside function on fast names but decides
from q_5 alone.  Run it through the harness, for example

    realstreams adversary --external "python3 demos/external_threshold.py" \
        --variant FAST_FAST --target HEAVISIDE -o cert.json
"""

import sys
from fractions import Fraction


def read():
    print("READ", flush=True)
    line = sys.stdin.readline()
    if not line:
        sys.exit(0)
    return Fraction(line.strip())


def main():
    q = [read() for _ in range(6)]
    out = 1 if q[5] > Fraction(1, 32) else 0
    while True:
        print("EMIT %d/1" % out, flush=True)


if __name__ == "__main__":
    try:
        main()
    except BrokenPipeError:
        pass
