"""Time the pure-Python and compiled kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one tab-separated row per (kernel, backend) with the best time and the
speedup over the pure-Python backend.  Outputs are compared before timing.
"""
import argparse
import random
import sys
import timeit

from storeplan import _pykernels, kernels


def line_ids(rng, lines, edits):
    a = list(range(lines))
    b = list(a)
    fresh = lines
    for _ in range(edits):
        at = rng.randrange(len(b))
        if rng.random() < 0.5:
            del b[at:at + rng.randint(1, 5)]
        else:
            b[at:at] = range(fresh, fresh + rng.randint(1, 5))
            fresh += 5
    return a, b


def search_instance(rng, n):
    offsets, par, dl, ph = [0], [], [], []
    for v in range(1, n + 1):
        for u in range(n + 1):
            if u != v and (u == 0 or rng.random() < 0.7):
                par.append(u)
                dl.append(rng.randint(1, 40) if u else rng.randint(60, 120))
                ph.append(rng.randint(1, 40) if u else rng.randint(60, 120))
        offsets.append(len(par))
    return n, offsets, par, dl, ph, _pykernels.STORAGE, _pykernels.MAX_REC, 150


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    mods = {m.BACKEND: m for m in kernels.available_backends()}
    if len(mods) < 2:
        print("compiled backend not built; only the Python kernels are available", file=sys.stderr)

    rng = random.Random(args.seed)
    cases = {
        "match_blocks 5000 lines, 40 edits": ("match_blocks", line_ids(rng, 5000, 40), 1),
        "match_blocks 500 lines, 200 edits": ("match_blocks", line_ids(rng, 500, 200), 5),
        "search_optimal n=7": ("search_optimal", search_instance(rng, 7), 1),
    }

    print("kernel\tbackend\tseconds\tspeedup")
    for label, (name, case_args, number) in cases.items():
        results = {b: getattr(m, name)(*case_args) for b, m in mods.items()}
        if len({repr(r) for r in results.values()}) != 1:
            raise SystemExit(f"backends disagree on {label}")
        times = {}
        for b, m in mods.items():
            fn = getattr(m, name)
            times[b] = min(timeit.repeat(lambda: fn(*case_args), number=number,
                                         repeat=args.repeat)) / number
        for b, t in times.items():
            print(f"{label}\t{b}\t{t:.6f}\t{times['python'] / t:.1f}x")


if __name__ == "__main__":
    main()
