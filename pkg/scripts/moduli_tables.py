"""Print moduli dimension tables for the catalogue groups.

Usage: python scripts/moduli_tables.py [--max-order R] [--groups o:2 o:3 ...] [--json OUT]
"""
import argparse
import json
import time

from gmoduli.moduli import moduli_table

DEFAULT_GROUPS = ["o:2", "o:3", "product:1,2", "product:2,1", "scalar:2", "scalar:3", "e:2"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-order", type=int, default=3)
    ap.add_argument("--groups", nargs="+", default=DEFAULT_GROUPS)
    ap.add_argument("--json", help="also write all tables to this file")
    args = ap.parse_args()
    tables = []
    for spec in args.groups:
        t0 = time.perf_counter()
        table = moduli_table(spec, args.max_order)
        print(table.to_text())
        print(f"  ({time.perf_counter() - t0:.1f} s)\n")
        tables.append(table.to_json())
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(tables, fh, indent=2, sort_keys=True)
            fh.write("\n")


if __name__ == "__main__":
    main()
