"""Optimal key rate versus distance for each method, written as CSV plus a summary.

    python3 scripts/distance_scan.py --step 10 --out results/scan.csv
    MDIQKD_WORKERS=4 python3 scripts/distance_scan.py --step 5

Set PLOT=1 to also save a log-scale figure next to the CSV (needs matplotlib).
"""
import argparse
import csv
import os
import subprocess
import sys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--from", dest="start", default="0")
    ap.add_argument("--to", dest="stop", default="160")
    ap.add_argument("--step", default="10")
    ap.add_argument("--nt", default="1e12")
    ap.add_argument("--methods", default="traditional,improved,lp")
    ap.add_argument("--out", default="results/scan.csv")
    args = ap.parse_args()

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    cmd = [sys.executable, "-m", "mdiqkd.cli", "scan", "--from", args.start, "--to", args.stop,
           "--step", args.step, "--nt", args.nt, "--methods", args.methods, "--out", args.out]
    subprocess.run(cmd, check=True)

    with open(args.out) as fh:
        rows = list(csv.DictReader(fh))
    by_d = {}
    for r in rows:
        by_d.setdefault(float(r["distance_km"]), {})[r["method"]] = float(r["R"])
    methods = args.methods.split(",")
    print("distance " + " ".join(f"{m:>12s}" for m in methods) + "   improved/trad")
    for d in sorted(by_d):
        Rs = by_d[d]
        ratio = ""
        if Rs.get("traditional", 0) > 0 and "improved" in Rs:
            ratio = f"{Rs['improved'] / Rs['traditional']:.3f}"
        print(f"{d:8.1f} " + " ".join(f"{Rs.get(m, float('nan')):12.4e}" for m in methods) + f"   {ratio}")

    if os.environ.get("PLOT"):
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 4))
        for m in methods:
            pts = [(d, Rs[m]) for d, Rs in sorted(by_d.items()) if Rs.get(m, 0) > 0]
            if pts:
                ax.semilogy(*zip(*pts), label=m, marker=".")
        ax.set_xlabel("distance (km)")
        ax.set_ylabel("optimal key rate per pulse pair")
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.splitext(args.out)[0] + ".png", dpi=150)


if __name__ == "__main__":
    main()
