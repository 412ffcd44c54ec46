#!/usr/bin/env python3
"""Frame-bound survey for dilated Davenport generators.

For each lambda and frequency family, computes the closed-form Gram
matrix, validates it against the grid-quadrature oracle, and tabulates
the finite-section frame bounds as the family grows.

    python scripts/davenport_frames.py --lambdas 0.75 1.0 1.5 --out frames/
"""

import argparse
from pathlib import Path

import numpy as np

from mgale.davenport import gram_matrix, gram_quadrature, riesz_constants


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.75, 1.0, 1.5])
    ap.add_argument("--kmax", type=int, default=16, help="largest lacunary exponent")
    ap.add_argument("--quadrature", action="store_true", help="run the oracle cross-check")
    ap.add_argument("--out", type=Path, default=Path("davenport_frames"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rows = ["lambda,family,K,min_eig,max_eig,riesz_lower,riesz_upper"]
    for lam in args.lambdas:
        for name, freqs_fn in (
            ("pow2", lambda K: [2**k for k in range(K + 1)]),
            ("integers", lambda K: list(range(1, K + 2))),
        ):
            for K in range(4, args.kmax + 1, 4):
                gm = gram_matrix(freqs_fn(K), lam)
                lo, hi = gm.eigen_bounds
                if lo > 1e-10:
                    rl, ru = riesz_constants(gm)
                else:
                    rl = ru = float("nan")
                rows.append(f"{lam},{name},{K},{lo!r},{hi!r},{rl!r},{ru!r}")
        if args.quadrature:
            freqs = sorted(set(list(range(1, 9)) + [2**k for k in range(9)]))
            err = float(np.abs(gram_matrix(freqs, lam).entries - gram_quadrature(freqs, lam)).max())
            print(f"lambda={lam}: quadrature oracle max error {err:.3e}")
    (args.out / "frame_bounds.csv").write_text("\n".join(rows) + "\n")
    print(f"wrote {args.out / 'frame_bounds.csv'}")


if __name__ == "__main__":
    main()
