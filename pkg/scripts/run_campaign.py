#!/usr/bin/env python3
"""Run the two acceptance campaigns (Q and F_3, 50 challenges each)."""

import argparse
import json
import time

from fieldrec import harness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--verification-classes", type=int, default=500)
    ap.add_argument("--out", help="write the full reports as JSON")
    args = ap.parse_args()

    all_reports = []
    for char, base in ((0, 100), (3, 200)):
        cfg = harness.CampaignConfig(characteristic=char, count=args.count,
                                     base_seed=base,
                                     verification_classes=args.verification_classes)
        t0 = time.perf_counter()
        reports = harness.run_campaign(cfg)
        dt = time.perf_counter() - t0
        ok = sum(r.success for r in reports)
        field = str(cfg.descriptor())
        print(f"{field}: {ok}/{len(reports)} exact recoveries in {dt:.0f}s")
        for r in reports:
            if not r.success:
                print(f"  FAIL seed={r.seed} family={r.family}: {r.failure}")
        all_reports.extend(reports)

    if args.out:
        with open(args.out, "w") as fh:
            json.dump([r.to_json() for r in all_reports], fh, indent=2)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
