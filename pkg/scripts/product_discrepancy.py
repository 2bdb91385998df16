"""Show where the closed-form equations for product structures part ways with the kernel.

For each symmetric multi-index S, report whether every kernel element satisfies
the index swap t^m_{S;j} = t^j_{S;m} for j, m in one block.
"""
import argparse
import itertools

from gmoduli.lie import build_splitting, make_group
from gmoduli.moduli import w_module, w_module_specialized


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--group", default="product:1,2")
    ap.add_argument("--k", type=int, default=2)
    args = ap.parse_args()
    g = make_group(args.group)
    split = build_splitting(g)
    w, ws = w_module(args.k, split), w_module_specialized(g, args.k)
    print(f"{g.name}, k={args.k}: dim kernel {w.dim}, dim closed form {ws.dim}, same span {w.same_span(ws)}")
    blk = lambda i: int(i >= g.blocks[0])
    for s in itertools.combinations_with_replacement(range(g.n), args.k):
        holds = all(v.component(s, (j,), (m,)) == v.component(s, (m,), (j,))
                    for v in w.vectors for j in range(g.n) for m in range(g.n) if blk(j) == blk(m))
        kind = "one block" if len({blk(i) for i in s}) == 1 else "mixed"
        print(f"  S={tuple(i + 1 for i in s)} ({kind}): swap relation {'holds' if holds else 'fails'}")


if __name__ == "__main__":
    main()
