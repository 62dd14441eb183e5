"""Pre-flight analysis: FOV-safe gain limits, impact-time windows, convergence bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy import integrate

from .errors import ConfigurationError
from .guidance_heading import VirtualInputCase
from .smoothing import sgmf

DEFAULT_ETA = 1.0


def k1_max(sigma_max: float, case) -> float:
    """Largest ``k1`` keeping the steady lead angle inside ``sigma_max``."""
    if not 0 < sigma_max < math.pi / 2:
        raise ConfigurationError(f"sigma_max must lie in (0, 90) deg, got {math.degrees(sigma_max):.6g} deg")
    case = VirtualInputCase(case)
    c = math.cos(sigma_max)
    if case is VirtualInputCase.B:
        return 2.0 * (1.0 - c)
    if case is VirtualInputCase.C:
        return 1.0 - math.sqrt(c)
    return 1.0 - c


def necessary_window(r0: float, vm: float, sigma_max: float) -> tuple[float, float]:
    """Impact times reachable by any law respecting the lead-angle bound.

    Bounded below by the collision course and above by flying the whole way at
    the slowest admissible closing speed ``Vm cos(sigma_max)``.
    """
    if not r0 > 0:
        raise ConfigurationError(f"initial range must be positive, got {r0}")
    return r0 / vm, r0 / (vm * math.cos(sigma_max))


def range_error_rate(e1: float, case, k1: float, phi: float, vm: float) -> float:
    """``e1_dot`` once the heading errors have vanished (``sigma = sigma_d``)."""
    s = sgmf(e1, phi)
    case = VirtualInputCase(case)
    if case is VirtualInputCase.B:
        return -0.5 * k1 * vm * s
    if case is VirtualInputCase.C:
        return k1 * k1 * vm * s * s - 2.0 * k1 * vm * s
    return -k1 * vm * s


def boundary_layer_time(eta: float, phi: float, k1: float, vm: float, case=VirtualInputCase.D) -> float:
    """Time for ``e1`` to decay from ``phi`` to ``eta`` inside the boundary layer.

    Cases A and D use the closed form ``phi/(3 k1 Vm) ln((3 phi^2 - eta^2)/(2 eta^2))``;
    case B the same with ``k1/2``; case C integrates ``de1 / |e1_dot|`` numerically.
    """
    case = VirtualInputCase(case)
    if eta <= 0:
        return math.inf
    if eta >= phi:
        return 0.0
    if case is VirtualInputCase.C:
        return boundary_layer_time_quad(eta, phi, k1, vm, case)
    k = 0.5 * k1 if case is VirtualInputCase.B else k1
    return phi / (3.0 * k * vm) * math.log((3.0 * phi**2 - eta**2) / (2.0 * eta**2))


def boundary_layer_time_quad(eta: float, phi: float, k1: float, vm: float, case) -> float:
    """Quadrature of ``int_eta^phi de1 / |e1_dot(e1)|`` for any case.

    Integrated in ``u = ln e1`` where the integrand is smooth and bounded.
    """
    def integrand(u):
        e = math.exp(u)
        return e / -range_error_rate(e, case, k1, phi, vm)

    value, _ = integrate.quad(integrand, math.log(eta), math.log(phi), epsabs=0.0, epsrel=1e-10, limit=200)
    return value


def heading_convergence_time(e3_0: float, e4_0: float, k3: float, k4: float) -> float:
    """Finite time for both heading errors to vanish at slopes ``k3``, ``k4``."""
    return max(abs(e3_0) / k3, abs(e4_0) / k4)


def sufficient_window(r0, vm, eta, phi, e3_0, e4_0, k1, k3, k4, case=VirtualInputCase.D):
    """Open interval of impact times guaranteed achievable by the heading law.

    The lower end comes from keeping the range error non-negative, the upper end
    from requiring the range error to settle to ``eta`` before ``tf``. ``t_max``
    is NaN when the effective gain is 1 or more (the prefactor changes sign) and
    ``-inf`` for ``eta = 0``.
    """
    case = VirtualInputCase(case)
    t_e2 = heading_convergence_time(e3_0, e4_0, k3, k4)
    t_min = (r0 + eta) / vm + 2.0 * t_e2
    k = 0.5 * k1 if case is VirtualInputCase.B else k1
    if k >= 1.0:
        return t_min, math.nan
    tail = boundary_layer_time(eta, phi, k1, vm, case)
    if math.isinf(tail):
        return t_min, -math.inf
    t_max = k / (1.0 - k) * ((r0 + phi) / (k * vm) - t_e2 - tail)
    return t_min, t_max


def convergence_time_bound(e3_0, e4_0, k3, k4, tf, r0, vm, k1, phi, eta, case=VirtualInputCase.D) -> float:
    """Upper bound on the time for ``|e1|`` to reach ``eta``.

    Heading transient, then linear decay at the case's saturated slope, then the
    boundary-layer tail. Infinite for ``eta = 0``.
    """
    case = VirtualInputCase(case)
    t_e2 = heading_convergence_time(e3_0, e4_0, k3, k4)
    slope = -range_error_rate(2.0 * phi, case, k1, phi, vm)
    linear = (vm * tf - r0 - phi) / slope
    return t_e2 + linear + boundary_layer_time(eta, phi, k1, vm, case)


def lemma2_check(e1_0: float, eta: float, vm: float, t_e2_zero: float) -> bool:
    """Sufficient condition for the range error to stay non-negative."""
    return abs(e1_0 - eta) / (2.0 * vm) > t_e2_zero


@dataclass
class FeasibilityReport:
    case: str
    k1: float
    tf: float
    eta: float
    e3_0: float
    e4_0: float
    t_e2_zero: float
    t_necessary: tuple
    t_sufficient: tuple
    k1_max: float
    tc_bound: float
    lemma2_ok: bool

    @property
    def sufficient_valid(self) -> bool:
        lo, hi = self.t_sufficient
        return math.isfinite(hi) and lo < hi

    def classify(self, tf: float | None = None) -> str:
        """``'sufficient'``, ``'necessary'`` or ``'outside'`` for an impact time."""
        tf = self.tf if tf is None else tf
        lo, hi = self.t_sufficient
        if self.sufficient_valid and lo < tf < hi:
            return "sufficient"
        nlo, nhi = self.t_necessary
        if nlo <= tf <= nhi:
            return "necessary"
        return "outside"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t_necessary"] = list(self.t_necessary)
        d["t_sufficient"] = list(self.t_sufficient)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeasibilityReport":
        d = dict(d)
        d["t_necessary"] = tuple(d["t_necessary"])
        d["t_sufficient"] = tuple(d["t_sufficient"])
        return cls(**d)


def analyze(r0, vm, sigma_max, tf, k1, k3, k4, phi, e3_0, e4_0, case=VirtualInputCase.D,
            eta=DEFAULT_ETA) -> FeasibilityReport:
    case = VirtualInputCase(case)
    t_e2 = heading_convergence_time(e3_0, e4_0, k3, k4)
    return FeasibilityReport(
        case=case.value,
        k1=k1,
        tf=tf,
        eta=eta,
        e3_0=e3_0,
        e4_0=e4_0,
        t_e2_zero=t_e2,
        t_necessary=necessary_window(r0, vm, sigma_max),
        t_sufficient=sufficient_window(r0, vm, eta, phi, e3_0, e4_0, k1, k3, k4, case),
        k1_max=k1_max(sigma_max, case),
        tc_bound=convergence_time_bound(e3_0, e4_0, k3, k4, tf, r0, vm, k1, phi, eta, case),
        lemma2_ok=lemma2_check(vm * tf - r0, eta, vm, t_e2),
    )
