#!/usr/bin/env python3
"""Write the bundled synthetic volumes (raw + sidecar meta) to a directory.

Produces nested_shells (empirical-style plateaus) and gaussian_blob
(simulated-style smooth density), the same fixtures the test suite uses.
"""

import argparse
import os

from autovis.volume import gaussian_blob, nested_shells, save_meta, save_raw


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data", help="output directory")
    ap.add_argument("--size", type=int, default=64, help="cube edge length")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name, maker in (("shells", nested_shells), ("blob", gaussian_blob)):
        v = maker(args.size)
        raw = os.path.join(args.out, f"{name}.raw")
        meta = os.path.join(args.out, f"{name}.json")
        save_raw(v, raw)
        save_meta(v.meta, meta)
        print(f"{raw}  ({v.meta.dims[0]}^3 {v.meta.scalar_kind}, "
              f"values [{v.v_min:.3g}, {v.v_max:.3g}])")


if __name__ == "__main__":
    main()
