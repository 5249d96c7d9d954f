"""Tabulate the one-, two- and chain-integral checks over a parameter grid.

    python3 scripts/lemma_table.py
"""
from wpbound.decomposition import verify_lemma
from wpbound.verify import lemma_grid


def main():
    print("which,param,numeric,tail,bound,passed")
    for which, key in (("trick1", "e"), ("trick2", "g"), ("trick3", "e")):
        for v in lemma_grid(20):
            c = verify_lemma(which, {key: float(v)})
            print(f"{which},{v:.4g},{c.numeric:.10f},{c.tail_bound:.1e},{c.bound:.10f},{c.passed}")
    for m in (2, 3, 4):
        for i in range(m):
            c = verify_lemma("chainok", {"m": m, "i": i, "value": 6.0})
            print(f"chainok m={m} i={i},6,{c.numeric:.10f},{c.tail_bound:.1e},{c.bound:.10f},{c.passed}")
    for m in (2, 3):
        c = verify_lemma("wheelok", {"m": m, "g": 6.0})
        print(f"wheelok m={m},6,{c.numeric:.10f},{c.tail_bound:.1e},{c.bound:.10f},{c.passed}")


if __name__ == "__main__":
    main()
