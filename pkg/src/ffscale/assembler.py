"""
Fast-forward Hamiltonian assembly.

``H_FF(t) = H_ref(s) + (ds/dt) [H_cd(s) + H_nad(t)]`` where the level phases
obey ``hbar df_n/dt = (1 - ds/dt) E_n(s)``. Two independent routes are
provided: :func:`assemble_direct` builds the terms from eigenbasis matrix
elements, :func:`assemble_series` sums the nested-commutator expansion of
``-i hbar U d/dt U^dag`` with ``U = exp(-O)``, ``O = i sum_n f_n |n><n|``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SeriesNotConverged
from .linalg import commutator, op_norm
from .spectral import cd_frame_elements, dh_ds, frame_at

SERIES_TOL = 1e-10
SERIES_K_MAX = 64
SERIES_MAX_PHASE = 30.0


@dataclass(frozen=True)
class PhaseAccumulator:
    """Level phases ``f_n`` at wall time ``t``."""

    t: float
    phases: np.ndarray
    hbar: float = 1.0

    @classmethod
    def start(cls, dim, hbar=1.0):
        return cls(0.0, np.zeros(dim), hbar)


def _phase_integrand(energies, rate, hbar):
    return (1.0 - rate) * np.asarray(energies) / hbar


def advance_phases(acc, dt, energies, rates):
    """Advance ``f_n`` by ``dt`` with Simpson's rule.

    Parameters
    ----------
    acc:
        Accumulator at ``t``.
    dt:
        Step size (> 0).
    energies:
        ``(3, D)`` level energies at ``t``, ``t + dt/2``, ``t + dt``.
    rates:
        ``ds/dt`` at the same three times.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    g = [_phase_integrand(e, r, acc.hbar) for e, r in zip(energies, rates)]
    phases = acc.phases + dt / 6.0 * (g[0] + 4.0 * g[1] + g[2])
    return PhaseAccumulator(acc.t + dt, phases, acc.hbar)


def midpoint_phases(acc, dt, energies, rates):
    """Phases at ``t + dt/2`` from the quadratic through the three Simpson samples."""
    g = [_phase_integrand(e, r, acc.hbar) for e, r in zip(energies, rates)]
    phases = acc.phases + dt / 24.0 * (5.0 * g[0] + 8.0 * g[1] - g[2])
    return PhaseAccumulator(acc.t + 0.5 * dt, phases, acc.hbar)


def _phase_factors(phases):
    # exp(-i (f_n - f_m)), differences wrapped to (-pi, pi]
    diff = phases[:, None] - phases[None, :]
    diff = np.remainder(diff + np.pi, 2.0 * np.pi) - np.pi
    return np.exp(-1j * diff)


def nad_frame_elements(cd_elements, phases):
    """``<n|H_nad|m> = -exp(-i(f_n - f_m)) <n|H_cd|m>``, zero diagonal."""
    out = -_phase_factors(phases) * cd_elements
    np.fill_diagonal(out, 0.0)
    return out


def nad_term(frame, h_cd, phases):
    """Nonadiabatic-reproduction term in the computational basis."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (frame.dim,):
        raise ValueError(f"expected {frame.dim} phases, got shape {phases.shape}")
    return frame.from_frame(nad_frame_elements(frame.to_frame(h_cd), phases))


@dataclass(frozen=True)
class FFAssembly:
    """Snapshot of every term of ``H_FF`` at one wall time.

    For the series route ``h_nad`` is extracted as
    ``(h_ff - h_ref_s) / rate - h_cd`` and is ``None`` when ``rate == 0``.
    """

    t: float
    s: float
    rate: float
    frame: object
    h_ref_s: np.ndarray
    h_cd: np.ndarray
    h_nad: np.ndarray
    h_ff: np.ndarray
    phases: np.ndarray
    route: str = "direct"
    series_terms: int = None


def assemble_from_frame(frame, dh, t, rate, phases, hbar=1.0):
    """Direct-route assembly for an already built frame."""
    cd = cd_frame_elements(frame, dh, hbar)
    nad = nad_frame_elements(cd, phases)
    h_cd = frame.from_frame(cd)
    h_nad = frame.from_frame(nad)
    h_ref = frame.hamiltonian
    h_ff = h_ref + rate * (h_cd + h_nad)
    return FFAssembly(t, frame.s, rate, frame, h_ref, h_cd, h_nad, h_ff, np.array(phases))


def assemble_direct(ham, sched, acc, t, prev_frame=None, hbar=1.0):
    s, rate = sched.eval(t)
    frame = frame_at(ham, s, prev_frame)
    return assemble_from_frame(frame, dh_ds(ham, s), t, rate, acc.phases, hbar)


def gauge_generator(frame, phases):
    """``O = i sum_n f_n |n><n|`` (anti-Hermitian)."""
    return frame.from_frame(np.diag(1j * np.asarray(phases, dtype=complex)))


def d_gauge_generator_dt(frame, phases, dphases_dt, rate, dh):
    """Time derivative of :func:`gauge_generator` along the run.

    Uses ``d|n>/dt = rate * sum_{m != n} |m><m|dH|n> / (E_n - E_m)``; the
    diagonal connection drops out of the projector derivative.
    """
    m = frame.to_frame(dh)
    e = frame.energies
    denom = e[None, :] - e[:, None]  # E_n - E_m at [m, n]
    np.fill_diagonal(denom, 1.0)
    g = m / denom
    np.fill_diagonal(g, 0.0)
    f = np.diag(np.asarray(phases, dtype=complex))
    inner = np.diag(np.asarray(dphases_dt, dtype=complex)) + rate * (g @ f - f @ g)
    return frame.from_frame(1j * inner)


def wrap_phases(phases):
    """Shift each phase by a multiple of 2*pi into (-pi, pi].

    ``exp(-O)`` and therefore ``exp(-O) d/dt exp(O)`` are unchanged, but the
    nested commutators shrink from powers of the raw phase spread to powers
    of at most ``2*pi``.
    """
    return -(np.remainder(-np.asarray(phases, dtype=float) + np.pi, 2.0 * np.pi) - np.pi)


def series_from_frame(frame, dh, t, rate, phases, hbar=1.0, tol=SERIES_TOL,
                      k_max=SERIES_K_MAX, max_phase=SERIES_MAX_PHASE, wrap=True):
    """Series-route assembly for an already built frame.

    With ``wrap=False`` the raw accumulated phases enter ``O`` and runs with a
    phase spread above ``max_phase`` are refused.
    """
    raw = np.asarray(phases, dtype=float)
    phases = wrap_phases(raw) if wrap else raw
    spread = float(phases.max() - phases.min())
    if spread > max_phase:
        raise SeriesNotConverged(
            f"phase spread {spread:.3g} exceeds {max_phase}; the alternating series "
            "loses all precision here, use the direct route",
            spread,
        )
    if k_max < 1 or tol <= 0:
        raise ValueError("need k_max >= 1 and tol > 0")
    h_ref = frame.hamiltonian
    o = gauge_generator(frame, phases)
    dphases = _phase_integrand(frame.energies, rate, hbar)
    term = d_gauge_generator_dt(frame, phases, dphases, rate, dh)
    # term_k = (-1)^k / (k+1)! ad_O^k dO, built recursively
    acc = term.copy()
    h_ff = rate * h_ref - 1j * hbar * acc
    converged = False
    k = 0
    for k in range(1, k_max + 1):
        term = -commutator(o, term) / (k + 1)
        acc = acc + term
        h_ff = rate * h_ref - 1j * hbar * acc
        if hbar * op_norm(term) < tol * max(op_norm(h_ff), np.finfo(float).tiny):
            converged = True
            break
    if not converged:
        raise SeriesNotConverged(
            f"series not converged after k_max={k_max} terms "
            f"(last term {hbar * op_norm(term):.3e}, |f| up to {np.abs(phases).max():.3g})",
            spread,
        )
    h_cd = frame.from_frame(cd_frame_elements(frame, dh, hbar))
    h_nad = (h_ff - h_ref) / rate - h_cd if rate != 0 else None
    return FFAssembly(t, frame.s, rate, frame, h_ref, h_cd, h_nad, h_ff, raw.copy(),
                      route="series", series_terms=k)


def assemble_series(ham, sched, acc, t, prev_frame=None, tol=SERIES_TOL, k_max=SERIES_K_MAX,
                    hbar=1.0, max_phase=SERIES_MAX_PHASE, wrap=True):
    s, rate = sched.eval(t)
    frame = frame_at(ham, s, prev_frame)
    return series_from_frame(frame, dh_ds(ham, s), t, rate, acc.phases, hbar, tol, k_max,
                             max_phase, wrap)


def decompose(op, basis):
    """Real least-squares coefficients of Hermitian ``op`` over Hermitian ``basis``.

    Returns ``(coefficients, residual)`` with the Frobenius-norm residual of
    the fit.
    """
    basis = np.asarray(basis)
    a = basis.reshape(len(basis), -1).T
    a = np.concatenate([a.real, a.imag])
    b = np.asarray(op).reshape(-1)
    b = np.concatenate([b.real, b.imag])
    coeffs, *_ = np.linalg.lstsq(a, b, rcond=None)
    return coeffs, float(np.linalg.norm(a @ coeffs - b))

