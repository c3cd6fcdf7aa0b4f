"""Sparse unitary matrices Q_n and the real-valued pencil transform.

Q_n is left Pi-real (Pi Q_n* = Q_n, with Pi the exchange matrix)::

    even n = 2h:  Q = 1/sqrt(2) [[I,  jI],
                                 [Pi, -jPi]]
    odd  n = 2h+1: Q = 1/sqrt(2) [[I,  0,       jI],
                                  [0,  sqrt(2), 0 ],
                                  [Pi, 0,      -jPi]]

Products with Q are done blockwise in O(n) per column.
"""

from __future__ import annotations

import numpy as np

_S = 1.0 / np.sqrt(2.0)


class UnitaryQ:
    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)
        self.h = self.n // 2
        self.odd = bool(self.n % 2)

    def dense(self) -> np.ndarray:
        h = self.h
        I = np.eye(h)
        Pi = I[::-1]
        Z = np.zeros((h, 1))
        if not self.odd:
            return _S * np.block([[I, 1j * I], [Pi, -1j * Pi]])
        return _S * np.block([
            [I, Z, 1j * I],
            [Z.T, np.sqrt(2.0) * np.ones((1, 1)), Z.T],
            [Pi, Z, -1j * Pi],
        ])

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Q @ x, x of shape (n, ...)."""
        x = np.asarray(x)
        h = self.h
        y1 = x[:h]
        y3 = x[self.n - h:]
        top = _S * (y1 + 1j * y3)
        bot = (_S * (y1 - 1j * y3))[::-1]
        if self.odd:
            return np.concatenate([top, x[h:h + 1].astype(complex), bot], axis=0)
        return np.concatenate([top, bot], axis=0)

    def apply_h(self, x: np.ndarray) -> np.ndarray:
        """Q^H @ x, x of shape (n, ...)."""
        x = np.asarray(x)
        h = self.h
        x1 = x[:h]
        x3r = x[self.n - h:][::-1]
        top = _S * (x1 + x3r)
        bot = -1j * _S * (x1 - x3r)
        if self.odd:
            return np.concatenate([top, x[h:h + 1].astype(complex), bot], axis=0)
        return np.concatenate([top, bot], axis=0)

    def rapply(self, x: np.ndarray) -> np.ndarray:
        """x @ Q, x of shape (..., n)."""
        return self.apply_h(np.asarray(x).conj().T).conj().T

    def rapply_h(self, x: np.ndarray) -> np.ndarray:
        """x @ Q^H."""
        return self.apply(np.asarray(x).conj().T).conj().T


def unitary_Q(n: int) -> UnitaryQ:
    return UnitaryQ(n)


def forward_backward(G: np.ndarray) -> np.ndarray:
    """[G : Pi G* Pi], the centro-Hermitian extension."""
    G = np.asarray(G)
    return np.concatenate([G, G[::-1, ::-1].conj()], axis=1)


def to_real_pencil(G: np.ndarray, check: bool = True, tol: float = 1e-12) -> np.ndarray:
    """Q_{m}^H [G : Pi G* Pi] Q_{2n} for an m x n complex G, returned as a real array.

    The product is real by construction. With ``check`` the relative imaginary
    residual is asserted below ``tol`` before it is dropped.
    """
    G = np.asarray(G, dtype=np.complex128)
    m, n = G.shape
    Gex = forward_backward(G)
    out = unitary_Q(2 * n).rapply(unitary_Q(m).apply_h(Gex))
    if check:
        nrm = np.linalg.norm(out)
        if nrm > 0:
            resid = np.linalg.norm(out.imag) / nrm
            if resid >= tol:
                raise ArithmeticError(f"real pencil has imaginary residual {resid:.2e}")
    return np.ascontiguousarray(out.real)
