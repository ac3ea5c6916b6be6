"""Fully optimized parameters and key rate at one distance, one column per method.

    python3 scripts/optimal_parameters.py --distance 50 --methods traditional,improved
    python3 scripts/optimal_parameters.py --distance 100 --methods traditional,improved,lp
"""
import argparse
import time

from mdiqkd import ChannelParams, optimize

# reference optima to compare against (R per pulse pair, N_t = 1e12)
REFERENCE = {
    (50.0, "traditional"): dict(mu_y=0.396, mu_x=0.056, p_y=0.646, p_x=0.256, pX_given_y=0.024,
                                pX_given_x=0.737, R=2.59e-6),
    (50.0, "improved"): dict(mu_y=0.401, mu_x=0.055, p_y=0.681, p_x=0.243, pX_given_y=0.013,
                             pX_given_x=0.709, R=3.31e-6),
    (100.0, "traditional"): dict(mu_y=0.269, mu_x=0.067, p_y=0.336, p_x=0.477, pX_given_y=0.132,
                                 pX_given_x=0.742, R=1.00e-8),
    (100.0, "improved"): dict(mu_y=0.275, mu_x=0.068, p_y=0.404, p_x=0.447, pX_given_y=0.084,
                              pX_given_x=0.719, R=2.46e-8),
    (100.0, "lp"): dict(mu_y=0.275, mu_x=0.068, p_y=0.404, p_x=0.447, pX_given_y=0.084,
                        pX_given_x=0.720, R=2.46e-8),
}
ROWS = ("mu_y", "mu_x", "p_y", "p_x", "pX_given_y", "pX_given_x")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--distance", type=float, default=50.0)
    ap.add_argument("--methods", default="traditional,improved")
    ap.add_argument("--nt", type=float, default=1e12)
    args = ap.parse_args()

    results = {}
    for m in args.methods.split(","):
        t0 = time.perf_counter()
        results[m] = optimize(ChannelParams(distance_km=args.distance), args.nt, m)
        print(f"# {m}: {results[m].n_evals} evaluations, {time.perf_counter() - t0:.1f} s")

    print(f"{'':12s}" + "".join(f"{m:>22s}" for m in results))
    for name in ROWS:
        cells = []
        for m, r in results.items():
            ref = REFERENCE.get((args.distance, m), {}).get(name)
            cells.append(f"{getattr(r.best, name):.3f}" + (f" ({ref:.3f})" if ref is not None else ""))
        print(f"{name:12s}" + "".join(f"{c:>22s}" for c in cells))
    cells = []
    for m, r in results.items():
        ref = REFERENCE.get((args.distance, m), {}).get("R")
        cells.append(f"{r.R:.3g}" + (f" ({ref:.3g})" if ref is not None else ""))
    print(f"{'R':12s}" + "".join(f"{c:>22s}" for c in cells))
    if "traditional" in results and results["traditional"].R > 0:
        for m in results:
            if m != "traditional":
                print(f"R({m}) / R(traditional) = {results[m].R / results['traditional'].R:.4f}")


if __name__ == "__main__":
    main()
