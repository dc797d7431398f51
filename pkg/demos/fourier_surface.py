"""Polya number of the Fourier walk over the psi_F(a, phi) family.

Run with ``python3 demos/fourier_surface.py [n_terms]``.
"""

import sys

import numpy as np

from qwrecur.polya import fit_fourier_surface, fourier_polya_surface


def main(n_terms: int = 100) -> None:
    model = fit_fourier_surface(2 * n_terms)
    a = np.linspace(0, 1 / np.sqrt(2), 29)
    phi = 2 * np.pi * np.arange(72) / 72
    surf = fourier_polya_surface(model, a, phi, n_terms)
    for key in ("minimum", "maximum"):
        e = getattr(surf, key)
        print(f"{key}: P = {e['value']:.4f} at a = {e['a']:.3f}, phi = {e['phi'] / np.pi:.3f} pi")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 100)
