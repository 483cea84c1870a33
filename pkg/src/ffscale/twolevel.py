"""
Closed forms for the driven two-level system ``H = -hx X - hz Z``.

These functions never call the generic eigensolver or assembler; tests use
them as an independent oracle for both.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import PAULI_X, PAULI_Y, PAULI_Z
from .spectral import CoefficientSchedule, ReferenceHamiltonian


@dataclass(frozen=True)
class TwoLevelParams:
    hx: CoefficientSchedule
    hz: CoefficientSchedule

    def fields(self, s):
        return self.hx.value(s), self.hz.value(s)

    def field_rates(self, s):
        return self.hx.derivative(s), self.hz.derivative(s)

    def reference(self, t_ref):
        return ReferenceHamiltonian((-PAULI_X, -PAULI_Z), (self.hx, self.hz), t_ref, ("-X", "-Z"))

    def dtheta_ds(self, s):
        """``(hz hx' - hx hz') / (2 (hx^2 + hz^2))``."""
        hx, hz = self.fields(s)
        dhx, dhz = self.field_rates(s)
        r2 = hx * hx + hz * hz
        if r2 == 0.0:
            raise ValueError("zero field: the two levels are degenerate")
        return (hz * dhx - hx * dhz) / (2.0 * r2)

    def theta_along(self, s_values):
        """``theta`` on a grid of ``s`` values, unwrapped to stay continuous."""
        two_theta = np.array([np.arctan2(*self.fields(s)) for s in s_values])
        return 0.5 * np.unwrap(two_theta)


def lz_params(hx=1.0, hz0=-10.0, sweep=1.0):
    """Landau-Zener instance ``hx`` constant, ``hz(s) = hz0 + sweep*s``."""
    return TwoLevelParams(CoefficientSchedule.constant(hx), CoefficientSchedule.linear(hz0, sweep))


def theta(hx, hz):
    if hx == 0.0 and hz == 0.0:
        raise ValueError("zero field: theta undefined")
    return 0.5 * np.arctan2(hx, hz)


def energy(hx, hz):
    return np.hypot(hx, hz)


def analytic_eigensystem(hx, hz):
    """``(E_-, E_+, |->, |+>)`` with ``|+> = (-sin th, cos th)``, ``|-> = (cos th, sin th)``."""
    th = theta(hx, hz)
    e = energy(hx, hz)
    minus = np.array([np.cos(th), np.sin(th)], dtype=complex)
    plus = np.array([-np.sin(th), np.cos(th)], dtype=complex)
    return -e, e, minus, plus


def analytic_cd(dtheta_ds):
    return dtheta_ds * PAULI_Y


def _w_even(th):
    return np.cos(2 * th) * PAULI_X - np.sin(2 * th) * PAULI_Z


def analytic_nad(dtheta_ds, f_plus, th):
    return (-dtheta_ds * np.sin(2 * f_plus) * _w_even(th)
            - dtheta_ds * np.cos(2 * f_plus) * PAULI_Y)


def analytic_hff(hx, hz, rate, dtheta_ds, f_plus):
    th = theta(hx, hz)
    h_ref = -hx * PAULI_X - hz * PAULI_Z
    return h_ref + rate * (analytic_cd(dtheta_ds) + analytic_nad(dtheta_ds, f_plus, th))


def analytic_gauge_generator(f_plus, th):
    """``O`` for ``f_- = -f_+``: ``-i f_+ (sin 2th X + cos 2th Z)``."""
    return -1j * f_plus * (np.sin(2 * th) * PAULI_X + np.cos(2 * th) * PAULI_Z)


def analytic_d_gauge_generator(hx, hz, rate, dtheta_ds, f_plus):
    """``dO/dt = i(1 - rate) H_ref(s) - 2i rate theta' f_+ (cos 2th X - sin 2th Z)``."""
    th = theta(hx, hz)
    h_ref = -hx * PAULI_X - hz * PAULI_Z
    return 1j * (1 - rate) * h_ref - 2j * rate * dtheta_ds * f_plus * _w_even(th)


def adjoint_series_term(k, rate, dtheta_ds, f_plus, th):
    """``ad_O^k dO/dt`` for ``k >= 1``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    w = 1j * PAULI_Y if k % 2 else _w_even(th)
    return rate * dtheta_ds * (-1j) ** (k + 1) * (2 * f_plus) ** (k + 1) * w
