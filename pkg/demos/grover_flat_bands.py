"""Flat bands of the Grover walk and why psi_G escapes localization.

Run with ``python3 demos/grover_flat_bands.py``.
"""

import numpy as np

from qwrecur import coins as C
from qwrecur.spectral import band_structure, find_saddles, flat_band_overlap, predicted_exponent


def main(n: int = 128) -> None:
    coin = C.grover_coin()
    grid = band_structure(coin, n)
    report = find_saddles(grid)
    print("flat bands:", grid.flat_bands())
    for label in ("psi_S", "psi_G"):
        state = C.named_state(label)
        ov = flat_band_overlap(state, grid)
        print(f"{label}: {ov.verdict}, max overlap {max(ov.max_overlaps.values()):.3e},"
              f" predicted alpha {predicted_exponent(report, grid, state)}")
    for p in report.points:
        print("saddle k =", np.round(p.k / np.pi, 4), "pi, band", p.band)


if __name__ == "__main__":
    main()
