"""Wigner 3j / Clebsch-Gordan coefficients by three-term recursion.

The 3j symbol ``(j1 j2 j3; m1 m2 m3)`` is generated as a function of ``j1``
with the Schulten-Gordon recursion

    j1 E(j1+1) f(j1+1) + F(j1) f(j1) + (j1+1) E(j1) f(j1-1) = 0,
    E(j1) = sqrt((j1^2 - (j2-j3)^2) ((j2+j3+1)^2 - j1^2) (j1^2 - m1^2)),
    F(j1) = -(2 j1 + 1) (j2(j2+1) m1 - j3(j3+1) m1 - j1(j1+1)(m3 - m2)).

It is run upward from ``j1min`` and downward from ``j1max`` and the two
branches are joined where the upward one stops growing, which keeps both
inside their stable direction. Normalization comes from
``sum (2 j1 + 1) f^2 = 1`` and the sign from ``sgn f(j1max) = (-1)^(j2-j3-m1)``.
No factorials are evaluated.
"""
from __future__ import annotations

import numpy as np

_RESCALE = 1e150


def _e(j1, j2, j3, m1):
    val = (j1**2 - (j2 - j3) ** 2) * ((j2 + j3 + 1) ** 2 - j1**2) * (j1**2 - m1**2)
    return np.sqrt(np.maximum(val, 0.0))


def three_j_rows(j2: float, j3: float, m1: float, m2s):
    """3j symbols ``(j1 j2 j3; m1 m2 -m1-m2)`` for every allowed j1.

    All rows share ``j2, j3, m1``; ``m2s`` is an array of second projections.

    Returns
    -------
    j1 : ndarray, shape (L,)
    values : ndarray, shape (len(m2s), L)
    """
    m2 = np.atleast_1d(np.asarray(m2s, dtype=float))
    m3 = -m1 - m2
    j1min = max(abs(j2 - j3), abs(m1))
    j1max = j2 + j3
    size = int(round(j1max - j1min)) + 1
    j1 = j1min + np.arange(size)
    rows = m2.size
    if size == 1:
        vals = np.ones((rows, 1))
    else:
        fwd = np.zeros((rows, size))
        bwd = np.zeros((rows, size))
        fcoef = -(2 * j1[:, None] + 1) * (
            j2 * (j2 + 1) * m1 - j3 * (j3 + 1) * m1 - j1[:, None] * (j1[:, None] + 1) * (m3 - m2)[None, :]
        )  # (size, rows)
        ecoef = _e(j1, j2, j3, m1)

        fwd[:, 0] = 1.0
        if j1min == 0:
            # j2 = j3, m1 = 0: the recursion is singular at j1 = 0; use the
            # closed-form ratio (1 j j; 0 m -m) / (0 j j; 0 m -m) = m / sqrt(j(j+1))
            fwd[:, 1] = m2 / np.sqrt(j2 * (j2 + 1))
        else:
            fwd[:, 1] = -fcoef[0] / (j1min * ecoef[1])
        for i in range(1, size - 1):
            fwd[:, i + 1] = -(fcoef[i] * fwd[:, i] + (j1[i] + 1) * ecoef[i] * fwd[:, i - 1]) / (
                j1[i] * ecoef[i + 1]
            )
            big = np.abs(fwd[:, i + 1]) > _RESCALE
            if big.any():
                fwd[big, : i + 2] /= _RESCALE

        bwd[:, -1] = 1.0
        bwd[:, -2] = -fcoef[-1] / ((j1[-1] + 1) * ecoef[-1])
        for i in range(size - 2, 0, -1):
            bwd[:, i - 1] = -(j1[i] * ecoef[i + 1] * bwd[:, i + 1] + fcoef[i] * bwd[:, i]) / (
                (j1[i] + 1) * ecoef[i]
            )
            big = np.abs(bwd[:, i - 1]) > _RESCALE
            if big.any():
                bwd[big, i - 1 :] /= _RESCALE

        # join where the upward branch first stops growing
        af = np.abs(fwd)
        falling = af[:, 1:] < af[:, :-1]
        join = np.where(falling.any(axis=1), falling.argmax(axis=1), size - 1)
        idx = np.arange(size)[None, :]
        scale = fwd[np.arange(rows), join] / bwd[np.arange(rows), join]
        vals = np.where(idx <= join[:, None], fwd, bwd * scale[:, None])

    norm = np.sqrt(np.sum((2 * j1 + 1) * vals**2, axis=1))
    target = 1.0 if round(j2 - j3 - m1) % 2 == 0 else -1.0
    sign = np.where(np.sign(vals[:, -1]) == target, 1.0, -1.0)
    return j1, vals * (sign / norm)[:, None]


def clebsch_gordan_column(j1: float, m1: float, j2: float, m2: float):
    """``<j1 m1; j2 m2 | J M>`` for all allowed J at ``M = m1 + m2``.

    Returns ``(J values, coefficients)``.
    """
    M = m1 + m2
    # (j1 j2 J; m1 m2 -M) = (J j1 j2; -M m1 m2)
    big_j, vals = three_j_rows(j1, j2, -M, [m1])
    phase = np.where(np.round(j1 - j2 + M) % 2 == 0, 1.0, -1.0)
    return big_j, phase * np.sqrt(2 * big_j + 1) * vals[0]


def multipole_coefficients(two_j: int):
    """``<J m'; K Q | J m'+Q>`` for J = two_j / 2, all K, Q, m'.

    Returns an array ``C[K, Q + 2J, k']`` with ``m' = k' - J``; entries with
    ``|m' + Q| > J`` or ``K < |Q|`` are zero.
    """
    j = two_j / 2
    dim = two_j + 1
    out = np.zeros((two_j + 1, 2 * two_j + 1, dim))
    mp = np.arange(dim) - j
    for q in range(-two_j, two_j + 1):
        ok = np.abs(mp + q) <= j + 1e-9
        if not ok.any():
            continue
        m_prime = mp[ok]
        m = m_prime + q
        # (J m'; K Q | J m) = (-1)^(J-K+m) sqrt(2J+1) (J K J; m' Q -m),
        # and (J K J; m' Q -m) = (K J J; Q -m m')
        ks, vals = three_j_rows(j, j, float(q), -m)
        ks_int = np.round(ks).astype(int)
        parity = np.where((np.round(j + m)[:, None] - ks_int[None, :]) % 2 == 0, 1.0, -1.0)
        out[ks_int[:, None], q + two_j, np.nonzero(ok)[0][None, :]] = (
            parity * np.sqrt(two_j + 1) * vals
        ).T
    return out
