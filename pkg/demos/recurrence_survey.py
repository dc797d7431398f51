"""Return probabilities, Polya numbers and decay exponents for the standard 2-D walks.

Run with ``python3 demos/recurrence_survey.py [t_max]``.
"""

import sys

import numpy as np

from qwrecur import coins as C
from qwrecur.evolution import evolve_collect
from qwrecur.polya import classify_recurrence, fit_decay_exponent, polya_partial

CASES = [
    ("grover, psi_S", C.grover_coin(), C.named_state("psi_S")),
    ("grover, psi_G", C.grover_coin(), C.named_state("psi_G")),
    ("fourier, e1", C.fourier_coin(), C.basis_state(4, 0)),
    ("fourier, psi_F(0.5, -pi/4)", C.fourier_coin(), C.named_state("psi_F", 0.5, -np.pi / 4)),
    ("hadamard x hadamard, e1", C.tensor_coin([C.hadamard()] * 2), C.basis_state(4, 0)),
]


def main(t_max: int = 400) -> None:
    print(f"{'walk':30s} {'P(t_max)':>10s} {'alpha':>7s}  verdict")
    for name, coin, state in CASES:
        series, _ = evolve_collect(coin, state, t_max)
        polya = polya_partial(series).partial_product
        alpha, _ = fit_decay_exponent(series, (t_max // 4, t_max))
        verdict = classify_recurrence(series).label if t_max >= 400 else "-"
        print(f"{name:30s} {polya:10.6f} {alpha:7.3f}  {verdict}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 400)
