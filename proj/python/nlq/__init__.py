"""White-noise nonlocality thresholds via symmetric-extension programs.

Density operators are square complex numpy arrays. Bipartite dims default
to the balanced factorization of the side; pass dims=(dA, dB) explicitly
for asymmetric splits.
"""

from ._core import (
    ResourceLimitError,
    bell_state,
    check_extension,
    chsh_max,
    cglmp_optimize,
    concurrence,
    entanglement_of_formation,
    ghz_two_qutrit,
    lambda_upper_bound,
    mems,
    mix_white_noise,
    parse_state_spec,
    pure_theta,
    quantify,
    validate,
    von_neumann_entropy,
    white_noise_state,
)

__all__ = [
    "ResourceLimitError",
    "bell_state",
    "check_extension",
    "chsh_max",
    "cglmp_optimize",
    "concurrence",
    "entanglement_of_formation",
    "ghz_two_qutrit",
    "lambda_upper_bound",
    "mems",
    "mix_white_noise",
    "parse_state_spec",
    "pure_theta",
    "quantify",
    "validate",
    "von_neumann_entropy",
    "white_noise_state",
]
