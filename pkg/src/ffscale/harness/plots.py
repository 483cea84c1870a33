"""Figures written next to the CSV output of ``run`` and ``sweep``."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_populations(result, path, title=None):
    """Level populations of both dynamics against wall time, with ``ds/dt`` underneath.

    Returns
    -------
    pathlib.Path or str
        ``path``, once the figure has been saved.
    """
    t = result.times
    p_ref = result.reference.populations
    p_ff = result.fast_forward.populations
    fig, (ax, ax_rate) = plt.subplots(2, 1, figsize=(6.4, 5.2), sharex=True,
                                      gridspec_kw={"height_ratios": [3, 1]})
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for n in range(p_ff.shape[1]):
        c = colors[n % len(colors)]
        ax.plot(t, p_ref[:, n], color=c, lw=2.5, alpha=0.35, label=f"reference, level {n}")
        ax.plot(t, p_ff[:, n], color=c, lw=1.0, ls="--", label=f"fast-forward, level {n}")
    ax.set_ylabel("population")
    ax.set_ylim(-0.03, 1.03)
    ax.legend(fontsize="small", ncol=2, loc="best")
    dev = result.population_deviation
    ax.set_title(title or f"max population deviation {dev:.2e}")

    ax_rate.plot(t, result.rates, color="k", lw=1.0)
    ax_rate.axhline(0.0, color="0.7", lw=0.5)
    ax_rate.set_xlabel("wall time t")
    ax_rate.set_ylabel("ds/dt")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_sweep(rows, path):
    """Infidelity against ``t_ref`` on log axes, with the phase lower bound on a twin axis."""
    good = [r for r in rows if not r.get("error")]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if good:
        t_ref = np.array([r["t_ref"] for r in good])
        inf = np.array([r["infidelity"] for r in good])
        # an exact zero cannot be drawn on a log axis
        ax.loglog(t_ref, np.maximum(inf, 1e-300), "o-", label="FF vs CD infidelity")
        if all(r["diabatic_error"] is not None for r in good):
            dia = np.array([r["diabatic_error"] for r in good])
            ax.loglog(t_ref, np.maximum(dia, 1e-300), "s:", label="reference diabatic error")
        ax.set_xlabel("reference duration T_ref")
        ax.set_ylabel("infidelity")
        twin = ax.twinx()
        twin.plot(t_ref, [r["phase_bound"] for r in good], "^--", color="tab:red",
                  label="phase lower bound")
        twin.set_yscale("log")
        twin.set_ylabel("T_ref * min gap", color="tab:red")
        ax.legend(loc="upper right", fontsize="small")
        ax.set_title(f"adiabatic-limit sweep at T_FF = {good[0]['t_ff']:g}")
    else:
        ax.text(0.5, 0.5, "every sweep row failed", ha="center", va="center",
                transform=ax.transAxes)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
