"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from .layers import Parameter

__all__ = ["max_relative_gradient_error"]


def max_relative_gradient_error(
    run,
    params: list[Parameter],
    n_coords: int = 20,
    h: float = 1e-5,
    seed: int = 0,
    floor: float = 1e-8,
) -> float:
    """Worst relative error between analytic and numeric gradients.

    ``run()`` must zero the gradients, execute a full forward/backward
    pass and return the scalar loss; it is re-invoked with single
    parameter coordinates perturbed by ``+-h`` to form central
    differences.  Up to ``n_coords`` coordinates are probed per
    parameter (all of them for small tensors).  ``floor`` bounds the
    relative-error denominator from below; deep compositions can have
    true gradients near the float64 noise of the difference quotient,
    and a floor around the tensor's gradient scale keeps the check
    meaningful there.
    """
    run()
    analytic = [p.grad.copy() for p in params]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.value.ravel()
        gflat = grad.ravel()
        if flat.base is not p.value:
            raise ValueError("parameter storage must be contiguous")
        if p.size <= n_coords:
            coords = np.arange(p.size)
        else:
            coords = rng.choice(p.size, size=n_coords, replace=False)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + h
            lp = run()
            flat[i] = orig - h
            lm = run()
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * h)
            denom = max(abs(numeric), abs(gflat[i]), floor)
            worst = max(worst, abs(numeric - gflat[i]) / denom)
    run()  # restore gradients for the unperturbed parameters
    return worst
