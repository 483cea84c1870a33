"""
Adiabatic-limit sweep: for a growing reference duration at fixed wall time,
compare the fast-forward protocol with plain counterdiabatic driving.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..errors import FFScaleError
from ..propagate import infidelity
from ..schedule import RescalingSchedule
from .runner import simulate

log = logging.getLogger(__name__)


def worker_count(n_jobs):
    """Parallelism for ``n_jobs`` rows, capped by ``FFSCALE_THREADS`` when set."""
    cap = os.environ.get("FFSCALE_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_jobs))


def sweep_row(scenario, t_ref, t_ff, dt=None):
    """One row of the sweep; numerical failures are returned in the ``error`` field."""
    dt = scenario.dt if dt is None else dt
    row = {"t_ref": float(t_ref), "t_ff": float(t_ff), "rate": t_ref / t_ff, "error": ""}
    try:
        ham = scenario.reference.dilated(t_ref)
        sched = RescalingSchedule.linear(t_ref, t_ff)
        common = dict(hbar=scenario.hbar, degeneracy_tol=scenario.degeneracy_tol,
                      ref_ds=scenario.ref_ds)
        ff = simulate(ham, sched, scenario.initial_state, dt, protocol="ff", **common)
        cd = simulate(ham, sched, scenario.initial_state, dt, protocol="cd",
                      with_reference=False, **common)
    except FFScaleError as exc:
        log.warning("sweep row t_ref=%s failed: %s", t_ref, exc)
        row["error"] = str(exc)
        return row
    gap = float(np.min(ff.min_gaps))
    if isinstance(scenario.initial_state, (int, np.integer)):
        n0 = int(scenario.initial_state)
        diabatic = float(1.0 - ff.reference.populations[-1, n0])
    else:
        diabatic = None
    row.update(
        infidelity=infidelity(ff.fast_forward.final_state, cd.fast_forward.final_state),
        diabatic_error=diabatic,
        nad_norm_mean=ff.metadata["nad_norm_mean"],
        nad_mean_norm=ff.metadata["nad_mean_norm"],
        min_gap=gap,
        # leading-order size of the phase difference at t = T_FF
        phase_bound=t_ref * gap / scenario.hbar,
        final_phase_spread=float(np.ptp(ff.phases[-1])),
    )
    return row


def sweep_adiabatic(scenario, t_refs, t_ff, dt=None, workers=None):
    """Run :func:`sweep_row` for every ``t_ref``; rows come back in input order.

    Each ``t_ref`` replays the scenario's Hamiltonian path over ``[0, t_ref]``
    and fast-forwards it linearly into ``t_ff``. Rows are independent and run
    in separate processes.
    """
    t_refs = [float(t) for t in t_refs]
    if not t_refs:
        raise ValueError("t_refs is empty")
    if any(b <= a for a, b in zip(t_refs, t_refs[1:])):
        raise ValueError("t_refs must be strictly ascending")
    if not t_ff > 0:
        raise ValueError("t_ff must be positive")
    if t_refs[0] < t_ff:
        log.warning("smallest t_ref %s is below t_ff %s: that row slows the dynamics down",
                    t_refs[0], t_ff)
    workers = worker_count(len(t_refs)) if workers is None else workers
    if workers == 1:
        return [sweep_row(scenario, t, t_ff, dt) for t in t_refs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(sweep_row, scenario, t, t_ff, dt) for t in t_refs]
        return [f.result() for f in futures]
