"""
Rescaling schedules ``t -> s(t)``.

Every schedule is a sequence of constant-rate segments. A positive ``blend``
width replaces each rate jump by a smoothstep transition centred on the
segment boundary, which makes ``ds/dt`` continuously differentiable while
leaving the boundary values of ``s`` unchanged.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

KINDS = ("identity", "linear", "smooth_ramp", "pause", "rewind", "piecewise")
TIME_SLACK = 1e-12


def _smoothstep(x):
    return x * x * (3.0 - 2.0 * x)


def _smoothstep_integral(x):
    return x**3 - 0.5 * x**4


@dataclass(frozen=True)
class RescalingSchedule:
    """Piecewise rescaling map.

    Attributes
    ----------
    kind:
        Label of the constructor that produced the schedule.
    durations, rates:
        Wall-time length and ``ds/dt`` of each segment.
    t_ref:
        Upper end of the reference domain; ``s(t)`` must stay in ``[0, t_ref]``.
    blend:
        Width of the smoothstep rate transitions (0 for sharp jumps).
    """

    kind: str
    durations: tuple
    rates: tuple
    t_ref: float
    blend: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown rescaling kind {self.kind!r}")
        durations = tuple(float(d) for d in self.durations)
        rates = tuple(float(r) for r in self.rates)
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "rates", rates)
        if not durations or len(durations) != len(rates):
            raise ValueError("durations and rates must be non-empty and of equal length")
        if any(d <= 0 or not np.isfinite(d) for d in durations):
            raise ValueError("segment durations must be positive and finite")
        if not all(np.isfinite(rates)):
            raise ValueError("segment rates must be finite")
        if self.blend < 0:
            raise ValueError("blend width must be non-negative")
        bounds = np.concatenate([[0.0], np.cumsum(durations)])
        object.__setattr__(self, "_bounds", bounds)
        object.__setattr__(
            self, "_starts", np.concatenate([[0.0], np.cumsum(np.array(durations) * rates)])
        )
        interior = bounds[1:-1]
        if self.blend > 0 and interior.size:
            # blend windows must lie inside [0, T_FF] and must not overlap
            half = 0.5 * self.blend
            if (
                interior[0] - half < -TIME_SLACK
                or interior[-1] + half > self.t_ff + TIME_SLACK
                or np.any(np.diff(interior) < self.blend - TIME_SLACK)
            ):
                raise ValueError("blend windows overlap or leave the run interval")
        self._check_range()

    # construction helpers -------------------------------------------------

    @classmethod
    def identity(cls, t_ref):
        return cls("identity", (t_ref,), (1.0,), t_ref)

    @classmethod
    def linear(cls, t_ref, t_ff):
        """``s(t) = (t_ref / t_ff) t``."""
        return cls("linear", (t_ff,), (t_ref / t_ff,), t_ref)

    @classmethod
    def piecewise(cls, durations, rates, t_ref, blend=0.0):
        return cls("piecewise", tuple(durations), tuple(rates), t_ref, blend)

    @classmethod
    def pause(cls, t_ref, t_ff, start, end, rate=None):
        """Linear run holding ``s`` fixed on ``[start, end]``.

        ``rate`` defaults to the value that lands on ``s(t_ff) = t_ref``.
        """
        if not 0 < start < end < t_ff:
            raise ValueError("pause window must satisfy 0 < start < end < t_ff")
        if rate is None:
            rate = t_ref / (t_ff - (end - start))
        return cls("pause", (start, end - start, t_ff - end), (rate, 0.0, rate), t_ref)

    @classmethod
    def rewind(cls, t_ref, t_ff, start, end, rewind_rate, rate=None):
        """Linear run that runs backwards at ``rewind_rate`` (< 0) on ``[start, end]``."""
        if not 0 < start < end < t_ff:
            raise ValueError("rewind window must satisfy 0 < start < end < t_ff")
        if rewind_rate >= 0:
            raise ValueError("rewind_rate must be negative")
        if rate is None:
            rate = (t_ref - rewind_rate * (end - start)) / (t_ff - (end - start))
        return cls(
            "rewind", (start, end - start, t_ff - end), (rate, rewind_rate, rate), t_ref
        )

    @classmethod
    def smooth_ramp(cls, t_ref, t_ff, ramp):
        """Rate rises smoothly from 0 over ``ramp``, plateaus, and falls back to 0.

        The plateau rate is chosen so that ``s(t_ff) = t_ref``; the rate is
        continuously differentiable and vanishes at both ends.
        """
        if not 0 < ramp <= 0.5 * t_ff:
            raise ValueError("ramp must satisfy 0 < ramp <= t_ff / 2")
        plateau = t_ref / (t_ff - ramp)
        durations = (0.5 * ramp, t_ff - ramp, 0.5 * ramp)
        return cls("smooth_ramp", durations, (0.0, plateau, 0.0), t_ref, ramp)

    # evaluation -----------------------------------------------------------

    @property
    def boundaries(self):
        return self._bounds.copy()

    @property
    def t_ff(self):
        return float(self._bounds[-1])

    @property
    def rate_jumps(self):
        """Interior times where ``ds/dt`` is discontinuous."""
        if self.blend > 0:
            return []
        b = self.boundaries
        return [float(b[i]) for i in range(1, len(self.rates)) if self.rates[i] != self.rates[i - 1]]

    def _segment(self, t, side):
        b = self._bounds
        if side == "right":
            i = int(np.searchsorted(b, t, side="right")) - 1
        else:
            i = int(np.searchsorted(b, t, side="left")) - 1
        return min(max(i, 0), len(self.rates) - 1)

    def eval(self, t, side="right"):
        """Return ``(s(t), ds/dt(t))``.

        At a sharp rate jump the rate is taken from the segment to the right
        of ``t`` unless ``side="left"``.
        """
        s, rate = self._eval_raw(t, side)
        # rounding can push s a hair outside the validated range
        return min(max(s, 0.0), self.t_ref), rate

    def _eval_raw(self, t, side="right"):
        slack = TIME_SLACK * max(1.0, self.t_ff)
        if not (-slack <= t <= self.t_ff + slack):
            raise DomainError(f"t={t!r} outside run interval [0, {self.t_ff}]")
        b = self._bounds
        i = self._segment(t, side)
        s = self._starts[i] + self.rates[i] * (t - b[i])
        rate = self.rates[i]
        if self.blend > 0:
            w = self.blend
            for j in range(1, len(self.rates)):
                lo = b[j] - 0.5 * w
                if t <= lo or t >= b[j] + 0.5 * w:
                    continue
                dr = self.rates[j] - self.rates[j - 1]
                x = (t - lo) / w
                rate = self.rates[j - 1] + dr * _smoothstep(x)
                s += w * dr * (_smoothstep_integral(x) - max(0.0, x - 0.5))
        return float(s), float(rate)

    def _check_range(self):
        b = self._bounds
        ts = list(b)
        if self.blend > 0:
            for j in range(1, len(self.rates)):
                ts.extend(np.linspace(b[j] - 0.5 * self.blend, b[j] + 0.5 * self.blend, 65))
        slack = 1e-9 * max(1.0, self.t_ref)
        for t in ts:
            t = min(max(t, 0.0), b[-1])
            s, _ = self._eval_raw(t)
            if s < -slack:
                raise ValueError(f"schedule reaches negative s={s:.6g} at t={t:.6g}")
            if s > self.t_ref + slack:
                raise ValueError(
                    f"schedule leaves the reference domain: s={s:.6g} > t_ref={self.t_ref} at t={t:.6g}"
                )
