"""Implicit-midpoint stepper for a linear coherence system coupled to two probes.

Every model in this package shares the same structure: at each ``xi`` node a
vector of coherences ``c`` obeys ``dc/dt = L(xi, t) c + i sqrt(d) GAMMA (E+ e_p
+ E- e_m)``, and the probe envelopes follow ``+dE+/dxi = i sqrt(d) c_p`` and
``-dE-/dxi = i sqrt(d) c_m`` with inputs at ``xi = 0`` and ``xi = 1``.

The fields are integrated with the trapezoid rule between nodes and the
coherences see the node-smoothed field ``(E[j-1] + 2 E[j] + E[j+1]) / 4``
(half-sums at the two edge nodes). With trapezoid weights for the stored
excitation this makes the discrete photon-flux identity exact, and implicit
midpoint in time keeps it exact step by step, so the energy bookkeeping closes
to round-off.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import GAMMA, DivergedIntegrationError, integrate_xi, trapezoid_weights

# builder(omega_plus, omega_minus) -> local operator, shape (n_xi, K, K)
OperatorBuilder = Callable[[complex, complex], np.ndarray]


@dataclass
class StepFlux:
    """Rates evaluated at the midpoint of one step (multiply by dt to integrate)."""

    flux_in: float
    flux_out: float
    loss: float
    loss_by_comp: np.ndarray
    E_plus_mid: np.ndarray
    E_minus_mid: np.ndarray


class MidpointStepper:
    def __init__(
        self,
        n_xi: int,
        d: float,
        n_comp: int,
        plus_idx: int,
        minus_idx: int,
        builder: OperatorBuilder,
        dt: float,
        cache_size: int = 8,
    ):
        self.n = n_xi
        self.d = d
        self.K = n_comp
        self.B = n_comp + 2
        self.plus_idx = plus_idx
        self.minus_idx = minus_idx
        self.builder = builder
        self.dt = dt
        self.h = 1.0 / (n_xi - 1)
        self.w = trapezoid_weights(n_xi)
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size
        self._static = self._static_entries()

    # -- assembly -----------------------------------------------------------

    def _idx(self, j, comp):
        return j * self.B + comp

    def _static_entries(self):
        """Matrix entries that do not depend on the controls."""
        n, h, sd = self.n, self.h, np.sqrt(self.d)
        rows, cols, vals = [], [], []

        def add(r, c, v):
            r = np.atleast_1d(r)
            rows.append(r)
            cols.append(np.broadcast_to(c, r.shape))
            vals.append(np.broadcast_to(np.asarray(v, dtype=complex), r.shape))

        j = np.arange(n)
        jj = j[1:]
        # E+ : E[0] = input ; E[j] - E[j-1] - i sqrt(d) h/2 (c[j-1] + c[j]) = 0
        add(self._idx(0, 0), self._idx(0, 0), 1.0)
        add(self._idx(jj, 0), self._idx(jj, 0), 1.0)
        add(self._idx(jj, 0), self._idx(jj - 1, 0), -1.0)
        cp = 2 + self.plus_idx
        add(self._idx(jj, 0), self._idx(jj - 1, cp), -0.5j * sd * h)
        add(self._idx(jj, 0), self._idx(jj, cp), -0.5j * sd * h)
        # E- : E[n-1] = input ; E[j] - E[j+1] - i sqrt(d) h/2 (c[j] + c[j+1]) = 0
        jm = j[:-1]
        cm = 2 + self.minus_idx
        add(self._idx(n - 1, 1), self._idx(n - 1, 1), 1.0)
        add(self._idx(jm, 1), self._idx(jm, 1), 1.0)
        add(self._idx(jm, 1), self._idx(jm + 1, 1), -1.0)
        add(self._idx(jm, 1), self._idx(jm, cm), -0.5j * sd * h)
        add(self._idx(jm, 1), self._idx(jm + 1, cm), -0.5j * sd * h)
        # coherence rows: smoothed-field drive -dt/2 * i sqrt(d) GAMMA * Ehat
        g = -0.5 * self.dt * 1j * sd * GAMMA
        for field, comp in ((0, cp), (1, cm)):
            inner = j[1:-1]
            add(self._idx(inner, comp), self._idx(inner - 1, field), 0.25 * g)
            add(self._idx(inner, comp), self._idx(inner, field), 0.5 * g)
            add(self._idx(inner, comp), self._idx(inner + 1, field), 0.25 * g)
            for a, b in ((0, 1), (n - 1, n - 2)):
                add(self._idx(a, comp), self._idx(a, field), 0.5 * g)
                add(self._idx(a, comp), self._idx(b, field), 0.5 * g)
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)

    def _factor(self, L: np.ndarray):
        n, K, B = self.n, self.K, self.B
        A = np.eye(K)[None] - 0.5 * self.dt * L
        nz = np.nonzero(np.any(A != 0, axis=0))
        kk, ll = nz
        base = np.arange(n)[:, None] * B
        r = (base + 2 + kk[None]).ravel()
        c = (base + 2 + ll[None]).ravel()
        v = A[:, kk, ll].ravel()
        rs, cs, vs = self._static
        M = sp.coo_matrix(
            (np.concatenate([vs, v]), (np.concatenate([rs, r]), np.concatenate([cs, c]))),
            shape=(n * B, n * B),
        ).tocsc()
        return splu(M)

    def operator(self, omega_plus: complex, omega_minus: complex):
        key = (complex(omega_plus), complex(omega_minus))
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        L = self.builder(*key)
        entry = (L, self._factor(L))
        self._cache[key] = entry
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return entry

    # -- stepping -----------------------------------------------------------

    def fields(self, c: np.ndarray, e_plus_in: complex, e_minus_in: complex):
        """Probe envelopes on the nodes for given coherences and inputs."""
        sd = np.sqrt(self.d)
        Ep = e_plus_in + 1j * sd * integrate_xi(c[self.plus_idx], True)
        Em = e_minus_in - 1j * sd * integrate_xi(c[self.minus_idx], False)
        return Ep, Em

    def stored(self, c: np.ndarray) -> float:
        return float(np.sum(self.w * np.sum(np.abs(c) ** 2, axis=0)))

    def step(self, c: np.ndarray, t: float, omegas, inputs_mid) -> tuple[np.ndarray, StepFlux]:
        """Advance coherences ``c`` (shape (K, n)) from ``t`` to ``t + dt``.

        ``omegas`` are the control values and ``inputs_mid`` the probe inputs,
        both taken at the step midpoint.
        """
        L, lu = self.operator(*omegas)
        n, B = self.n, self.B
        rhs = np.zeros(n * B, complex)
        rhs.reshape(n, B)[:, 2:] = c.T
        rhs[self._idx(0, 0)] = inputs_mid[0]
        rhs[self._idx(n - 1, 1)] = inputs_mid[1]
        u = lu.solve(rhs).reshape(n, B)
        c_mid = u[:, 2:].T
        c_new = 2.0 * c_mid - c
        if not np.all(np.isfinite(c_new)):
            raise DivergedIntegrationError(t + self.dt)
        Ep, Em = u[:, 0], u[:, 1]
        Lc = np.einsum("jkl,lj->kj", L, c_mid)
        loss = -2.0 * float(np.real(np.sum(self.w * np.sum(np.conj(c_mid) * Lc, axis=0))))
        diag = -2.0 * np.real(np.diagonal(L, axis1=1, axis2=2)).T
        loss_by_comp = np.sum(self.w * diag * np.abs(c_mid) ** 2, axis=1)
        flux = StepFlux(
            flux_in=GAMMA * float(abs(Ep[0]) ** 2 + abs(Em[-1]) ** 2),
            flux_out=GAMMA * float(abs(Ep[-1]) ** 2 + abs(Em[0]) ** 2),
            loss=loss,
            loss_by_comp=loss_by_comp,
            E_plus_mid=Ep,
            E_minus_mid=Em,
        )
        return c_new, flux
