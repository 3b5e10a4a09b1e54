"""Pure-Python kernels, used when the compiled extension is unavailable."""

import numpy as np


def tangent_flow(hessians, kick_w, drift_w, inv_mass, dt):
    """Linearized kick/drift flow started from the identity; returns the 2k x 2k map."""
    hessians = np.asarray(hessians, dtype=float)
    k = hessians.shape[1]
    phi = np.eye(2 * k)
    dq, dp = phi[:k], phi[k:]
    for H, a, b in zip(hessians, kick_w, drift_w):
        if a != 0.0:
            dp -= (a * dt) * (H @ dq)
        if b != 0.0:
            dq += (b * dt) * (inv_mass[:, None] * dp)
    return phi


def kdk_linear(hessian, q0, p0, kick_w, drift_w, inv_mass, dt, n_steps):
    """Kick/drift integration of a linear force ``-H q`` (fixed Hessian); returns (q, p) per step."""
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    qs = np.empty((n_steps + 1, q.size))
    ps = np.empty_like(qs)
    qs[0], ps[0] = q, p
    for s in range(n_steps):
        for a, b in zip(kick_w, drift_w):
            if a != 0.0:
                p -= (a * dt) * (hessian @ q)
            if b != 0.0:
                q += (b * dt) * inv_mass * p
        qs[s + 1], ps[s + 1] = q, p
    return qs, ps
