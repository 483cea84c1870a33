"""
Time-dependent reference Hamiltonians and their instantaneous spectra.

A reference Hamiltonian is ``H(s) = sum_k c_k(s) B_k`` with constant
Hermitian operators ``B_k`` and scalar coefficient schedules ``c_k``.
:func:`frame_at` diagonalises ``H(s)`` and fixes the eigenvector phases by
parallel transport against the previous frame, which lets :func:`cd_term`
build the counterdiabatic term from first-order perturbation theory.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AmbiguousTracking, DegenerateSpectrum, DomainError
from .linalg import as_hermitian, hermitian_eig, op_norm

DEGENERACY_TOL = 1e-8
DOMAIN_SLACK = 1e-12

SCHEDULE_KINDS = ("constant", "linear", "polynomial", "tanh_ramp")


@dataclass(frozen=True)
class CoefficientSchedule:
    """Scalar schedule ``c(t)`` with an analytic derivative.

    ``params`` by kind:

    * ``constant``: ``[c]``
    * ``linear``: ``[a, b]`` for ``a + b*t``
    * ``polynomial``: ``[c0, c1, ...]`` in ascending powers
    * ``tanh_ramp``: ``[offset, amplitude, center, width]`` for
      ``offset + amplitude*tanh((t - center)/width)``
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        expected = {"constant": 1, "linear": 2, "tanh_ramp": 4}
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind in expected and len(self.params) != expected[self.kind]:
            raise ValueError(f"{self.kind} schedule takes {expected[self.kind]} params")
        if self.kind == "polynomial" and not self.params:
            raise ValueError("polynomial schedule needs at least one coefficient")
        if self.kind == "tanh_ramp" and self.params[3] == 0.0:
            raise ValueError("tanh_ramp width must be non-zero")
        if not all(np.isfinite(self.params)):
            raise ValueError("schedule params must be finite")

    @classmethod
    def constant(cls, c):
        return cls("constant", (c,))

    @classmethod
    def linear(cls, a, b):
        return cls("linear", (a, b))

    def value(self, t):
        p = self.params
        if self.kind == "constant":
            return p[0]
        if self.kind == "linear":
            return p[0] + p[1] * t
        if self.kind == "polynomial":
            return float(np.polynomial.polynomial.polyval(t, p))
        return p[0] + p[1] * np.tanh((t - p[2]) / p[3])

    def derivative(self, t):
        p = self.params
        if self.kind == "constant":
            return 0.0
        if self.kind == "linear":
            return p[1]
        if self.kind == "polynomial":
            return float(np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(p)))
        return p[1] / p[3] / np.cosh((t - p[2]) / p[3]) ** 2

    def dilated(self, factor):
        """Schedule ``c(t / factor)``: the same curve played ``factor`` times slower."""
        p = self.params
        if self.kind == "constant":
            return self
        if self.kind == "linear":
            return CoefficientSchedule("linear", (p[0], p[1] / factor))
        if self.kind == "polynomial":
            return CoefficientSchedule("polynomial", tuple(c / factor**k for k, c in enumerate(p)))
        return CoefficientSchedule("tanh_ramp", (p[0], p[1], p[2] * factor, p[3] * factor))


@dataclass(frozen=True)
class ReferenceHamiltonian:
    """``H(s) = sum_k c_k(s) B_k`` on the domain ``[0, t_ref]``."""

    basis: tuple
    schedules: tuple
    t_ref: float
    labels: tuple = None
    _stack: np.ndarray = field(init=False, repr=False, compare=False)
    _flat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        basis = tuple(as_hermitian(b) for b in self.basis)
        if not basis:
            raise ValueError("operator basis is empty")
        if len(basis) != len(self.schedules):
            raise ValueError(
                f"{len(basis)} basis operators but {len(self.schedules)} schedules"
            )
        dims = {b.shape for b in basis}
        if len(dims) != 1:
            raise ValueError(f"basis operators have mixed shapes {sorted(dims)}")
        if not self.t_ref > 0:
            raise ValueError("t_ref must be positive")
        labels = self.labels or tuple(f"B{k}" for k in range(len(basis)))
        if len(labels) != len(basis):
            raise ValueError("labels and basis differ in length")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "schedules", tuple(self.schedules))
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "_stack", np.stack(basis))
        object.__setattr__(self, "_flat", self._stack.reshape(len(basis), -1))

    @property
    def dim(self):
        return self._stack.shape[1]

    def check_domain(self, s):
        slack = DOMAIN_SLACK * max(1.0, self.t_ref)
        if not (-slack <= s <= self.t_ref + slack):
            raise DomainError(f"s={s!r} outside reference domain [0, {self.t_ref}]")

    def coefficients(self, s):
        return np.array([c.value(s) for c in self.schedules])

    def dilated(self, t_ref):
        """Same Hamiltonian path traversed over ``[0, t_ref]`` instead of ``[0, self.t_ref]``."""
        factor = t_ref / self.t_ref
        return ReferenceHamiltonian(
            self.basis, tuple(c.dilated(factor) for c in self.schedules), t_ref, self.labels
        )


def hamiltonian_at(ham, s):
    ham.check_domain(s)
    d = ham.dim
    return (ham.coefficients(s) @ ham._flat).reshape(d, d)


def dh_ds(ham, s):
    ham.check_domain(s)
    rates = np.array([c.derivative(s) for c in ham.schedules])
    d = ham.dim
    return (rates @ ham._flat).reshape(d, d)


@dataclass(frozen=True)
class SpectralFrame:
    """Gauge-fixed eigendecomposition of ``H(s)``; eigenvectors are the columns of ``states``."""

    s: float
    energies: np.ndarray
    states: np.ndarray
    min_gap: float
    hamiltonian: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.energies.shape[0]

    def to_frame(self, op):
        """Matrix elements ``<n|op|m>``."""
        return self.states.conj().T @ op @ self.states

    def from_frame(self, mat):
        return self.states @ mat @ self.states.conj().T

    def regauged(self, phases):
        """Copy with eigenvector ``n`` multiplied by ``exp(1j*phases[n])``."""
        return replace(self, states=self.states * np.exp(1j * np.asarray(phases)))


def _min_gap(values):
    if values.shape[0] < 2:
        return np.inf
    return float(np.min(np.diff(np.sort(values))))


def frame_from_matrix(h, s, prev=None, degeneracy_tol=DEGENERACY_TOL):
    """Build a :class:`SpectralFrame` from an explicit Hermitian matrix.

    Without ``prev`` the frame is energy-sorted and each eigenvector has its
    largest-magnitude component made real positive. With ``prev`` the levels
    are matched to ``prev`` by maximal overlap and every overlap
    ``<n_prev|n>`` is made real positive (parallel transport).
    """
    eig = hermitian_eig(h, check=False)
    values, vectors = eig.values, eig.vectors
    gap = _min_gap(values)
    threshold = degeneracy_tol * op_norm(h)
    if gap <= threshold:
        raise DegenerateSpectrum(s, gap, threshold)

    if prev is None:
        idx = np.argmax(np.abs(vectors), axis=0)
        pivots = vectors[idx, np.arange(vectors.shape[1])]
        vectors = vectors * (np.abs(pivots) / pivots)
    else:
        overlaps = prev.states.conj().T @ vectors
        mags = np.abs(overlaps)
        order = np.argmax(mags, axis=1)
        best = mags[np.arange(len(order)), order]
        if len(set(order.tolist())) != len(order) or best.min() < 1.0 / np.sqrt(2.0):
            raise AmbiguousTracking(s, float(best.min()))
        values = values[order]
        vectors = vectors[:, order]
        diag = overlaps[np.arange(len(order)), order]
        vectors = vectors * (np.abs(diag) / diag)
    return SpectralFrame(float(s), values, vectors, gap, h)


def frame_at(ham, s, prev=None, degeneracy_tol=DEGENERACY_TOL):
    return frame_from_matrix(hamiltonian_at(ham, s), s, prev, degeneracy_tol)


def cd_frame_elements(frame, dh, hbar=1.0):
    """Counterdiabatic term in the frame basis: ``i*hbar*<n|dH|m>/(E_m - E_n)``, zero diagonal."""
    m = frame.to_frame(dh)
    e = frame.energies
    denom = e[None, :] - e[:, None]
    np.fill_diagonal(denom, 1.0)
    out = 1j * hbar * m / denom
    np.fill_diagonal(out, 0.0)
    return out


def cd_term(frame, dh, hbar=1.0):
    """Counterdiabatic term (adiabatic gauge potential) in the computational basis."""
    if frame.min_gap <= 0.0:
        raise DegenerateSpectrum(frame.s, frame.min_gap, 0.0)
    return frame.from_frame(cd_frame_elements(frame, dh, hbar))
