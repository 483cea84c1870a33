"""
Run orchestration: one sequential pass over the wall-time grid that builds
frames, accumulates phases, assembles the generator and steps both the
fast-forward state and the reference state at the rescaled time.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..assembler import (
    PhaseAccumulator,
    advance_phases,
    assemble_from_frame,
    decompose,
    midpoint_phases,
    series_from_frame,
    SERIES_K_MAX,
    SERIES_TOL,
)
from ..errors import SeriesNotConverged
from ..linalg import op_norm
from ..propagate import StateTrajectory, midpoint_step, normalized, populations_in_frame
from ..spectral import DEGENERACY_TOL, dh_ds, frame_at, hamiltonian_at

log = logging.getLogger(__name__)

ROUTES = ("direct", "series", "both")
PROTOCOLS = ("ff", "cd")


@dataclass
class RunResult:
    """Everything one run produces.

    ``reference`` holds ``psi_ref(s(t_k))`` on the wall-time grid; its
    populations are taken in the frame at ``s(t_k)`` just like those of
    ``fast_forward``. ``steps`` holds per-assembly residual arrays, one entry
    per midpoint and grid assembly.
    """

    reference: StateTrajectory
    fast_forward: StateTrajectory
    s: np.ndarray
    rates: np.ndarray
    phases: np.ndarray
    min_gaps: np.ndarray
    steps: dict
    decomposition: dict = None
    assemblies: list = None
    metadata: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.fast_forward.times

    @property
    def population_deviation(self):
        return float(np.max(np.abs(self.fast_forward.populations - self.reference.populations)))


def reference_step(ham, psi, s0, s1, ds_max, hbar=1.0):
    """Step ``psi_ref`` from ``s0`` to ``s1`` (either direction) with midpoint substeps of size <= ``ds_max``."""
    delta = s1 - s0
    if delta == 0.0:
        return psi
    n = max(1, int(np.ceil(abs(delta) / ds_max - 1e-9)))
    step = delta / n
    for j in range(n):
        mid = s0 + (j + 0.5) * step
        psi = midpoint_step(hamiltonian_at(ham, mid), psi, step, hbar)
    return psi


def _check_residuals(a, hbar):
    fr = a.frame
    ff = fr.to_frame(a.h_ff)
    diag = float(np.max(np.abs(np.diagonal(ff).real - fr.energies)))
    cd = fr.to_frame(a.h_cd)
    nad = fr.to_frame(a.h_nad)
    dphi = a.phases[:, None] - a.phases[None, :]
    rel = nad + np.exp(-1j * dphi) * cd
    np.fill_diagonal(rel, 0.0)
    herm = op_norm(a.h_ff - a.h_ff.conj().T)
    return diag, float(np.max(np.abs(rel))), herm


def simulate(ham, sched, psi0, dt, *, hbar=1.0, route="direct", protocol="ff",
             series_tol=SERIES_TOL, k_max=SERIES_K_MAX, wrap_series=True,
             degeneracy_tol=DEGENERACY_TOL, control_basis=None, regauge_rng=None,
             ref_ds=None, keep_assemblies=False, with_reference=True):
    """Run the fast-forward (or pure counterdiabatic) protocol and the reference dynamics.

    Parameters
    ----------
    ham, sched:
        Reference Hamiltonian and rescaling schedule.
    psi0:
        Initial state vector, or an ``int`` selecting the eigenstate of
        ``H_ref(s(0))`` with that level index.
    dt:
        Wall-time step; shrunk uniformly so the grid ends on ``t_ff``.
    route:
        ``direct``, ``series`` (series drives the evolution) or ``both``
        (direct drives, series is evaluated alongside for comparison).
    protocol:
        ``ff`` for ``H_FF``; ``cd`` for ``H_ref(s) + (ds/dt) H_cd(s)``.
    control_basis:
        Optional ``(labels, matrices)`` onto which ``H_cd`` and ``H_nad`` are
        projected at every grid point.
    regauge_rng:
        If given, every frame used for assembly and populations gets random
        eigenvector phases (level tracking still uses the unperturbed chain).
    ref_ds:
        Largest reference substep in ``s``; defaults to ``dt``.
    """
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}")
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    ref_ds = dt if ref_ds is None else ref_ds
    n_steps = max(1, int(np.ceil(sched.t_ff / dt - 1e-9)))
    times = np.linspace(0.0, sched.t_ff, n_steps + 1)
    dim = ham.dim

    def gauge(frame):
        if regauge_rng is None:
            return frame
        return frame.regauged(regauge_rng.uniform(0.0, 2.0 * np.pi, frame.dim))

    s_k, rate_k = sched.eval(0.0)
    frame_k = frame_at(ham, s_k, None, degeneracy_tol)
    if isinstance(psi0, (int, np.integer)):
        if not 0 <= psi0 < dim:
            raise ValueError(f"eigenstate index {psi0} out of range for dim {dim}")
        psi0 = frame_k.states[:, psi0]
    psi_ff = normalized(psi0)
    psi_ref = psi_ff.copy()
    acc = PhaseAccumulator.start(dim, hbar)

    n = times.size
    s_arr = np.empty(n)
    rates = np.empty(n)
    phases = np.empty((n, dim))
    gaps = np.empty(n)
    st_ff = np.empty((n, dim), dtype=complex)
    st_ref = np.empty((n, dim), dtype=complex)
    p_ff = np.empty((n, dim))
    p_ref = np.empty((n, dim))
    steps = {key: [] for key in ("t", "s", "rate", "diagonal", "element", "hermiticity",
                                 "route", "series_terms", "phase_spread")}
    decomp = None
    if control_basis is not None:
        labels, mats = control_basis
        decomp = {"labels": list(labels), "cd": np.empty((n, len(mats))),
                  "nad": np.empty((n, len(mats))), "cd_residual": np.empty(n),
                  "nad_residual": np.empty(n)}
    kept = [] if keep_assemblies else None
    nad_integral = np.zeros((dim, dim), dtype=complex)
    nad_norm_integral = 0.0

    def record_assembly(a, frame, dh, rate, t):
        diag, elem, herm = _check_residuals(a, hbar)
        route_res, terms = np.nan, -1
        series = None
        if route in ("series", "both"):
            try:
                series = series_from_frame(frame, dh, t, rate, a.phases, hbar, series_tol,
                                           k_max, wrap=wrap_series)
                route_res = op_norm(series.h_ff - a.h_ff)
                terms = series.series_terms
            except SeriesNotConverged:
                if route == "series":
                    raise
        for key, val in (("t", t), ("s", a.s), ("rate", rate), ("diagonal", diag),
                         ("element", elem), ("hermiticity", herm), ("route", route_res),
                         ("series_terms", terms),
                         ("phase_spread", float(np.ptp(a.phases)))):
            steps[key].append(val)
        if kept is not None:
            kept.append(a if series is None else (a, series))
        return series

    def grid_record(k, frame, acc_k, s, rate, t):
        s_arr[k] = s
        rates[k] = rate
        phases[k] = acc_k.phases
        gaps[k] = frame.min_gap
        st_ff[k] = psi_ff
        st_ref[k] = psi_ref
        used = gauge(frame)
        p_ff[k] = populations_in_frame(used, psi_ff)
        p_ref[k] = populations_in_frame(used, psi_ref)
        dh = dh_ds(ham, s)
        a = assemble_from_frame(used, dh, t, rate, acc_k.phases, hbar)
        record_assembly(a, used, dh, rate, t)
        if decomp is not None:
            for name, op in (("cd", a.h_cd), ("nad", a.h_nad)):
                coeffs, res = decompose(op, control_basis[1])
                decomp[name][k] = coeffs
                decomp[f"{name}_residual"][k] = res

    grid_record(0, frame_k, acc, s_k, rate_k, 0.0)
    for k in range(n_steps):
        t0, t1 = times[k], times[k + 1]
        h = t1 - t0
        tm = t0 + 0.5 * h
        s_m, rate_m = sched.eval(tm)
        s_1, rate_1_left = sched.eval(t1, side="left")
        frame_m = frame_at(ham, s_m, frame_k, degeneracy_tol)
        frame_1 = frame_at(ham, s_1, frame_m, degeneracy_tol)
        energies = (frame_k.energies, frame_m.energies, frame_1.energies)
        step_rates = (rate_k, rate_m, rate_1_left)
        acc_m = midpoint_phases(acc, h, energies, step_rates)

        used_m = gauge(frame_m)
        dh_m = dh_ds(ham, s_m)
        a_m = assemble_from_frame(used_m, dh_m, tm, rate_m, acc_m.phases, hbar)
        series = record_assembly(a_m, used_m, dh_m, rate_m, tm)
        nad_integral += h * rate_m * a_m.h_nad
        nad_norm_integral += h * abs(rate_m) * op_norm(a_m.h_nad)
        if protocol == "cd":
            gen = a_m.h_ref_s + rate_m * a_m.h_cd
        elif route == "series":
            gen = series.h_ff
        else:
            gen = a_m.h_ff
        psi_ff = midpoint_step(gen, psi_ff, h, hbar)
        if with_reference:
            psi_ref = reference_step(ham, psi_ref, s_k, s_1, ref_ds, hbar)
        acc = advance_phases(acc, h, energies, step_rates)

        s_k, rate_k = sched.eval(t1)
        frame_k = frame_1
        grid_record(k + 1, frame_k, acc, s_k, rate_k, t1)

    steps = {key: np.asarray(val) for key, val in steps.items()}
    meta = {
        "schedule": sched.kind,
        "t_ff": sched.t_ff,
        "t_ref": ham.t_ref,
        "dt": float(times[1] - times[0]),
        "route": route,
        "protocol": protocol,
        "rate_jumps": sched.rate_jumps,
        # time averages of (ds/dt) H_nad: norm of the average vs average of the norm
        "nad_mean_norm": op_norm(nad_integral) / sched.t_ff,
        "nad_norm_mean": float(nad_norm_integral) / sched.t_ff,
    }
    if sched.rate_jumps:
        log.info("rescaling rate jumps at t=%s; H_FF is discontinuous there", sched.rate_jumps)
    ff = StateTrajectory(times, st_ff, p_ff, dict(meta, dynamics="fast_forward"))
    ref = StateTrajectory(times, st_ref, p_ref, dict(meta, dynamics="reference", s=s_arr))
    return RunResult(ref, ff, s_arr, rates, phases, gaps, steps, decomp, kept, meta)
