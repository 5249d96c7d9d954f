"""Print ln(upper bound)/(g ln g) for each bound variant at selected genera.

    python3 scripts/limits_table.py [--gmax 5000]
"""
import argparse

from wpbound.bounds import limit_ratio

VARIANTS = ("conclusion-n1", "assembled", "general-n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--gmax", type=int, default=100_000)
    args = ap.parse_args()
    gs = [g for g in (2, 5, 10, 20, 50, 100, 500, 1000, 5000, 10_000, 50_000, 100_000) if g <= args.gmax]
    print("g," + ",".join(VARIANTS))
    for g in gs:
        print(f"{g}," + ",".join(f"{limit_ratio(g, 1, v):.4f}" for v in VARIANTS))


if __name__ == "__main__":
    main()
