"""
Integrators for ``i hbar d/dt psi = H(t) psi``.

:func:`evolve` is the production integrator (exponential midpoint, exactly
norm preserving). :func:`rk4_oracle` is an independent classical RK4 used
only to cross-check it.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import exp_unitary

NORM_TOL = 1e-10


@dataclass
class StateTrajectory:
    """States and level populations on a time grid.

    ``populations[k, n]`` is ``|<n|psi_k>|^2`` in the frame supplied to the
    integrator, or in the computational basis when no frame was given.
    """

    times: np.ndarray
    states: np.ndarray
    populations: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def final_state(self):
        return self.states[-1]


def normalized(psi0, tol=NORM_TOL):
    psi = np.asarray(psi0, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("state must be a 1-D vector")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError(f"state is not normalised (norm {np.linalg.norm(psi):.12g})")
    return psi


def populations_in_frame(frame, psi):
    """``|<n(s)|psi>|^2`` for every level of ``frame``."""
    psi = np.asarray(psi)
    if frame.dim != psi.shape[0]:
        raise ValueError(f"frame dim {frame.dim} != state dim {psi.shape[0]}")
    return np.abs(frame.states.conj().T @ psi) ** 2


def _populations(frame_fn, t, psi):
    if frame_fn is None:
        return np.abs(psi) ** 2
    return populations_in_frame(frame_fn(t), psi)


def _grid(t0, t1, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = max(1, int(np.ceil((t1 - t0) / dt - 1e-9)))
    return np.linspace(t0, t1, n + 1)


def midpoint_step(h_mid, psi, dt, hbar=1.0):
    return exp_unitary(h_mid, dt / hbar, check=False) @ psi


def evolve(generator, psi0, t0, t1, dt, frame_fn=None, hbar=1.0):
    """Exponential-midpoint integration ``psi <- exp(-i dt H(t + dt/2)/hbar) psi``.

    The step is shrunk uniformly so that the grid ends exactly at ``t1``.
    ``frame_fn(t)``, when given, returns the spectral frame used to record
    populations at grid time ``t``.
    """
    psi = normalized(psi0)
    times = _grid(t0, t1, dt)
    states = np.empty((times.size, psi.size), dtype=complex)
    pops = np.empty((times.size, psi.size))
    states[0] = psi
    pops[0] = _populations(frame_fn, times[0], psi)
    for k in range(times.size - 1):
        h = times[k + 1] - times[k]
        psi = midpoint_step(generator(times[k] + 0.5 * h), psi, h, hbar)
        states[k + 1] = psi
        pops[k + 1] = _populations(frame_fn, times[k + 1], psi)
    return StateTrajectory(times, states, pops, {"integrator": "exp-midpoint", "dt": times[1] - times[0]})


def rk4_oracle(generator, psi0, t0, t1, dt, frame_fn=None, hbar=1.0):
    """Classical RK4 on ``d psi/dt = -i H psi / hbar``; no renormalisation."""
    psi = normalized(psi0)
    times = _grid(t0, t1, dt)
    states = np.empty((times.size, psi.size), dtype=complex)
    pops = np.empty((times.size, psi.size))
    states[0] = psi
    pops[0] = _populations(frame_fn, times[0], psi)

    def rhs(t, y):
        return -1j / hbar * (generator(t) @ y)

    for k in range(times.size - 1):
        t = times[k]
        h = times[k + 1] - t
        k1 = rhs(t, psi)
        k2 = rhs(t + 0.5 * h, psi + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, psi + 0.5 * h * k2)
        k4 = rhs(t + h, psi + h * k3)
        psi = psi + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k + 1] = psi
        pops[k + 1] = _populations(frame_fn, times[k + 1], psi)
    return StateTrajectory(times, states, pops, {"integrator": "rk4", "dt": times[1] - times[0]})


def infidelity(phi, psi):
    return float(1.0 - abs(np.vdot(phi, psi)) ** 2)
