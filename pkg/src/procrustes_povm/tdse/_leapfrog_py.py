"""NumPy implementation of the staggered leapfrog half-updates.

Arrays are ``(nx, ny, 2)`` float64 with the last axis the spin component
(0 = down, 1 = up). Only interior points are written; the outer frame stays
at zero (Dirichlet).

Real part, from ``u^n`` to ``u^{n+1}`` with ``v`` held at ``n + 1/2``::

    u_i += a * (T v_i + Vd_i v_i + Wr v_j) + a * Im(W_ij) * (u_j + u_j') / 2

Imaginary part, from ``v^{n+1/2}`` to ``v^{n+3/2}`` with the new ``u``::

    v_i += -a * (T u_i + Vd_i u_i + Wr u_j) + a * Im(W_ij) * (v_j + v_j') / 2

where ``T f = cx (2f - f[k+1] - f[k-1]) + cy (2f - f[l+1] - f[l-1])``,
``a = dt / hbar``, ``W_01 = Wr + i Wi`` and ``W_10`` its conjugate. The
imaginary coupling is averaged over the old and new values (a 2x2 solve per
point), which keeps the spin rotation it generates orthogonal.
"""
from __future__ import annotations

import numpy as np


def _apply_h(f: np.ndarray, vd: np.ndarray, wr: np.ndarray | None, cx: float, cy: float) -> np.ndarray:
    """Real-symmetric part of H applied to ``f``, interior points only."""
    c = f[1:-1, 1:-1]
    out = cx * (2.0 * c - f[2:, 1:-1] - f[:-2, 1:-1])
    out += cy * (2.0 * c - f[1:-1, 2:] - f[1:-1, :-2])
    out += vd[1:-1, 1:-1] * c
    if wr is not None:
        w = wr[1:-1, 1:-1]
        out[..., 0] += w * c[..., 1]
        out[..., 1] += w * c[..., 0]
    return out


def _cayley(target: np.ndarray, rhs: np.ndarray, wi: np.ndarray | None, a: float) -> None:
    c = target[1:-1, 1:-1]
    if wi is None:
        c += rhs
        return
    b = 0.5 * a * wi[1:-1, 1:-1]
    r0 = c[..., 0] + rhs[..., 0] + b * c[..., 1]
    r1 = c[..., 1] + rhs[..., 1] - b * c[..., 0]
    den = 1.0 + b * b
    c[..., 0] = (r0 + b * r1) / den
    c[..., 1] = (r1 - b * r0) / den


def update_u(u, v, vd, wr, wi, cx, cy, a):
    _cayley(u, a * _apply_h(v, vd, wr, cx, cy), wi, a)


def update_v(u, v, vd, wr, wi, cx, cy, a):
    _cayley(v, -a * _apply_h(u, vd, wr, cx, cy), wi, a)


def apply_h(f, vd, wr, cx, cy):
    """Full-array version of the real-symmetric part of H (frame rows zero)."""
    out = np.zeros_like(f)
    out[1:-1, 1:-1] = _apply_h(f, vd, wr, cx, cy)
    return out
