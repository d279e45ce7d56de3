"""Closed-form eigenstates of open 1D crystalline chains.

Every eigenstate of a two-band open chain is written as

    psi(x) = N * [ phi_plus(x) alpha^x - (phi_plus(L)/phi_minus(L)) phi_minus(x) alpha^(2L-x) ]

where phi_plus/phi_minus are unit-cell Bloch functions associated with alpha
and 1/alpha, and the mode parameter alpha fully characterises the state:
|alpha| = 1 for band (bulk) states, 0 < |alpha| < 1 for in-gap bound states.
The SSH closed forms (two-band dispersion, Bloch components, zero-mode
sublattice recursion) live here, together with the two quantization routes:
the wall boundary condition for bulk states and the single-site local
Schroedinger equation for the in-gap state.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    InvalidSpecError,
    SingularityError,
    UnsupportedPathError,
)
from .lattice import LatticeSpec, build_hamiltonian

_UNIT_TOL = 1e-9            # |alpha| distance from the unit circle
_IMAG_AXIS_TOL = 1e-12      # relative size of Re(alpha) for the in-gap family
_ZERO_MODE_MANIFOLD_TOL = 1e-8


@dataclass(frozen=True)
class BlochPair:
    """Unit-cell Bloch functions for the alpha^x and alpha^(-x) branches.

    Components are indexed by absolute site parity/residue: ``phi_plus[x % tau]``
    is the amplitude at site x. The gauge fixes the first component of
    ``phi_plus`` to 1 wherever that component is nonzero.
    """

    phi_plus: np.ndarray
    phi_minus: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.phi_plus, dtype=complex).copy()
        m = np.asarray(self.phi_minus, dtype=complex).copy()
        if p.shape != m.shape or p.ndim != 1:
            raise InvalidSpecError("Bloch branches must be 1D arrays of equal length")
        p.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "phi_plus", p)
        object.__setattr__(self, "phi_minus", m)

    @property
    def tau(self) -> int:
        return len(self.phi_plus)

    def plus_at(self, x: int) -> complex:
        return self.phi_plus[x % self.tau]

    def minus_at(self, x: int) -> complex:
        return self.phi_minus[x % self.tau]


@dataclass(frozen=True)
class EigenStateRecord:
    """One eigenstate: mode parameter, band, energy, site amplitudes, norm factor.

    ``norm`` is the prefactor N relating the unnormalised two-branch form to
    the stored unit-norm ``coeffs``. ``kind`` is 'bulk' or 'in-gap'.
    """

    alpha: complex
    band: int
    energy: float
    coeffs: np.ndarray
    norm: float
    kind: str

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.kind not in ("bulk", "in-gap"):
            raise InvalidSpecError(f"unknown state kind {self.kind!r}")


def bulk_quasimomenta(spec: LatticeSpec) -> np.ndarray:
    """Quasimomenta pi*n/(L-x0), n = 1 .. L-x0-1, of a commensurate chain.

    For a commensurate chain the wall boundary condition alone quantizes the
    band states, independent of the unit-cell content.
    """
    if not spec.is_commensurate:
        raise UnsupportedPathError(
            "chain is not commensurate with its unit cell; "
            "use the generic quantization route (generic_bloch)"
        )
    span = spec.L - spec.x0
    return np.pi * np.arange(1, span) / span


def ssh_energy(alpha: complex, lam: float, s: int) -> float:
    """Two-band SSH dispersion at mode parameter ``alpha``.

    Evaluated through real-valued rearrangements on the two supported
    families: alpha = e^{ik} on the unit circle gives
    (-1)^s * 2*sqrt(cos^2 k + lam^2 sin^2 k); purely imaginary alpha (the
    in-gap family) gives exactly 0. The result is invariant under
    alpha -> 1/alpha.
    """
    if s not in (0, 1):
        raise InvalidSpecError(f"band label must be 0 or 1, got {s}")
    a = complex(alpha)
    if a == 0:
        raise DomainError("alpha must be nonzero")
    sign = 1.0 if s == 0 else -1.0
    if abs(a.real) <= _IMAG_AXIS_TOL * abs(a):
        return sign * 0.0
    if abs(abs(a) - 1.0) <= _UNIT_TOL:
        k = cmath.phase(a)
        return sign * 2.0 * math.sqrt(math.cos(k) ** 2 + lam**2 * math.sin(k) ** 2)
    e2 = ((1 + a * a) / a) ** 2 - lam**2 * ((a * a - 1) / a) ** 2
    if abs(e2.imag) > 1e-10 * max(1.0, abs(e2)) or e2.real < 0:
        raise DomainError(
            f"negative or complex squared energy {e2} outside the supported alpha families"
        )
    return sign * math.sqrt(e2.real)


def _bloch_second_components(alpha: complex, lam: float, energy: float) -> tuple[complex, complex]:
    a = complex(alpha)
    v_plus = ((1 + a * a) - lam * (1 - a * a)) / (energy * a)
    v_minus = ((a + 1 / a) - lam * (a - 1 / a)) / energy
    return v_plus, v_minus


def _on_zero_mode_manifold(alpha: complex, lam: float) -> bool:
    if abs(1 + lam) < 1e-14:
        return False
    target = -(1.0 - lam) / (1.0 + lam)
    a2 = complex(alpha) ** 2
    return abs(a2 - target) <= _ZERO_MODE_MANIFOLD_TOL * (1 + abs(target))


def ssh_bloch(alpha: complex, lam: float, s: int) -> BlochPair:
    """Unit-cell Bloch pair of the SSH chain at ``alpha``.

    The explicit second component divides by the energy, so it only exists
    off the zero-energy point. The E = 0 in-gap state uses the limiting
    sublattice-polarized pair instead: phi_plus = (1, 0) on the branch with
    alpha^2 = -(1-lam)/(1+lam), and phi_minus = (0, 1) for its inverse.
    """
    energy = ssh_energy(alpha, lam, s)
    if energy == 0.0:
        if _on_zero_mode_manifold(alpha, lam):
            return BlochPair(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        raise SingularityError(
            "zero-energy Bloch functions are singular off the sublattice-polarized "
            "branch alpha^2 = -(1-lambda)/(1+lambda); pass the inverse alpha for the "
            "other branch"
        )
    v_plus, v_minus = _bloch_second_components(alpha, lam, energy)
    return BlochPair(np.array([1.0, v_plus]), np.array([1.0, v_minus]))


def _branch_ratio(spec: LatticeSpec, bloch: BlochPair) -> complex:
    phi_l_plus = bloch.plus_at(spec.L)
    phi_l_minus = bloch.minus_at(spec.L)
    if phi_l_plus == 0:
        return 0.0 + 0.0j
    if phi_l_minus == 0:
        raise SingularityError("phi_minus vanishes at the L wall; branch ratio undefined")
    return phi_l_plus / phi_l_minus


def extended_amplitude(spec: LatticeSpec, bloch: BlochPair, alpha: complex, x: int) -> complex:
    """Unnormalised two-branch amplitude at any site label, walls included."""
    a = complex(alpha)
    ratio = _branch_ratio(spec, bloch)
    value = bloch.plus_at(x) * a**x
    if ratio != 0:
        value -= ratio * bloch.minus_at(x) * a ** (2 * spec.L - x)
    return value


def assemble_state(
    spec: LatticeSpec,
    bloch: BlochPair,
    alpha: complex,
    energy: float,
    band: int = 0,
    kind: str | None = None,
) -> EigenStateRecord:
    """Build the normalized two-branch eigenstate from its Bloch data.

    The norm factor is taken real positive; the first-component-1 Bloch gauge
    then makes the site phases lambda-independent for the in-gap state.
    """
    a = complex(alpha)
    xs = spec.sites()
    tau = bloch.tau
    phi_p = bloch.phi_plus[xs % tau]
    phi_m = bloch.phi_minus[xs % tau]
    ratio = _branch_ratio(spec, bloch)
    psi_t = phi_p * a**xs
    if ratio != 0:
        psi_t = psi_t - ratio * phi_m * a ** (2 * spec.L - xs)
    nrm = float(np.linalg.norm(psi_t))
    if nrm == 0 or not np.isfinite(nrm):
        raise SingularityError(f"degenerate state assembly at alpha={a}")
    if kind is None:
        kind = "bulk" if abs(abs(a) - 1.0) <= _UNIT_TOL else "in-gap"
    return EigenStateRecord(
        alpha=a,
        band=band,
        energy=float(energy),
        coeffs=psi_t / nrm,
        norm=1.0 / nrm,
        kind=kind,
    )


def ssh_lambda_of(spec: LatticeSpec) -> float:
    """Recover lambda from an SSH-patterned spec; rejects anything else."""
    if spec.tau != 2:
        raise InvalidSpecError("not an SSH spec: unit cell period is not 2")
    if np.max(np.abs(spec.mu)) > 1e-12:
        raise InvalidSpecError("not an SSH spec: nonzero on-site energies")
    if np.max(np.abs(spec.t.imag)) > 1e-12:
        raise InvalidSpecError("not an SSH spec: complex hoppings")
    bonds = np.arange(spec.x0 + 1, spec.L - 1)
    first_sign = 1.0 if bonds[0] % 2 == 0 else -1.0
    lam = (1.0 - spec.t[0].real) * first_sign
    expected = 1.0 - lam * np.where(bonds % 2 == 0, 1.0, -1.0)
    if np.max(np.abs(spec.t.real - expected)) > 1e-12:
        raise InvalidSpecError("hoppings do not alternate in the SSH pattern")
    return float(lam)


# ---------------------------------------------------------------------------
# In-gap (zero-mode) machinery
# ---------------------------------------------------------------------------

def zero_mode_sublattice_sign(spec: LatticeSpec) -> float:
    """+1 when the populated sublattice is the even one (odd walls)."""
    return 1.0 if (spec.x0 + 1) % 2 == 0 else -1.0


def zero_mode_internal_alpha(spec: LatticeSpec, lam: float) -> complex:
    """Mode parameter of the populated-sublattice recursion psi(x+2)/psi(x) = alpha^2.

    This is the smooth assembly branch; its modulus exceeds 1 when the state
    is bound to the far wall. The conventional representative with modulus
    below 1 is ``1j * sqrt((1-|lam|)/(1+|lam|))``.
    """
    sigma = zero_mode_sublattice_sign(spec)
    if (1 - sigma * lam) <= 0 or (1 + sigma * lam) <= 0:
        raise SingularityError(f"zero mode undefined at lambda={lam}: a bond has vanished")
    return 1j * math.sqrt((1 - sigma * lam) / (1 + sigma * lam))


def in_gap_record(spec: LatticeSpec, lam: float) -> EigenStateRecord:
    """Exact zero-energy edge state of an odd-length commensurate SSH chain.

    Assembled from the sublattice-polarized recursion (amplitudes alpha^x on
    one parity, zero on the other), which is the regular limit of the
    two-branch form at zero energy. Amplitudes are evaluated with a shifted
    exponent so large chains at strong dimerisation do not overflow.
    """
    _require_ssh(spec, lam)
    alpha_int = zero_mode_internal_alpha(spec, lam)
    a_int = abs(alpha_int)
    xs = spec.sites()
    populated = (xs % 2) == ((spec.x0 + 1) % 2)
    xp = xs[populated]
    x_ref = xp[0] if a_int <= 1.0 else xp[-1]
    log_a = math.log(a_int)
    profile = np.exp((xp - x_ref) * log_a)
    phases = 1j ** (xp.astype(float))
    psi = np.zeros(spec.n_sites, dtype=complex)
    psi[populated] = profile * phases
    nrm = float(np.linalg.norm(psi))
    psi /= nrm
    with np.errstate(over="ignore", under="ignore"):
        norm_factor = math.exp(-x_ref * log_a) / nrm if abs(x_ref * log_a) < 700 else 0.0
    a_rep = a_int if a_int <= 1.0 else 1.0 / a_int
    return EigenStateRecord(
        alpha=1j * a_rep,
        band=0,
        energy=0.0,
        coeffs=psi,
        norm=norm_factor,
        kind="in-gap" if lam != 0 else "bulk",
    )


def _edge_residual(a: float, lam: float, L: int, x0: int, t_first: float) -> float:
    """Local Schroedinger residual at site x0+1 for a trial in-gap alpha = i*a.

    The wall condition psi(x0) = 0 turns the single-site equation into
    E * psi(x0+1) = t_{x0+1} * psi(x0+2) with the two-branch trial state
    substituted. Multiplying through by E and by the phi_minus numerator
    clears the zero-energy singularities, leaving a purely imaginary
    expression whose imaginary part changes sign exactly once on (0, 1).
    """
    alpha = 1j * a
    a2 = alpha * alpha
    e2 = ((1 + a2) / alpha) ** 2 - lam**2 * ((a2 - 1) / alpha) ** 2
    n_plus = ((1 + a2) - lam * (1 - a2)) / alpha
    n_minus = (alpha + 1 / alpha) - lam * (alpha - 1 / alpha)
    p_outer = alpha ** (2 * (L - x0 - 1))
    p_inner = alpha ** (2 * (L - x0 - 2))
    r = e2 * (n_minus - n_plus * p_outer) - t_first * n_plus * n_minus * alpha * (1 - p_inner)
    return r.imag


def edge_alpha(spec: LatticeSpec, lam: float) -> complex:
    """Mode parameter a*e^{i pi/2} of the in-gap edge state, by bisection.

    The in-gap state is not fixed by the wall boundary condition alone; it is
    the unique root of the single-site local Schroedinger residual. The root
    is cross-checked against the closed form sqrt((1-|lam|)/(1+|lam|)).
    """
    _require_ssh(spec, lam)
    if not spec.is_commensurate or spec.n_sites % 2 == 0:
        raise InvalidSpecError(
            "in-gap zero mode requires a commensurate chain with an odd site count"
        )
    if spec.x0 % 2 == 0:
        raise UnsupportedPathError("edge-state root solving expects odd wall index x0")
    if lam == 0:
        raise SingularityError("lambda=0 has no isolated in-gap root (a -> 1, bulk state)")
    if abs(lam) >= 1:
        raise SingularityError(f"|lambda|={abs(lam)} >= 1: a bond vanishes, zero mode degenerate")
    t_first = spec.t[0].real
    lo, hi = 1e-9, 1.0 - 1e-9
    f_lo = _edge_residual(lo, lam, spec.L, spec.x0, t_first)
    f_hi = _edge_residual(hi, lam, spec.L, spec.x0, t_first)
    if f_lo == 0.0:
        return 1j * lo
    if f_hi == 0.0:
        return 1j * hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise SingularityError(f"in-gap root not bracketed at lambda={lam}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _edge_residual(mid, lam, spec.L, spec.x0, t_first)
        if f_mid == 0.0:
            lo = hi = mid
            break
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    a_root = 0.5 * (lo + hi)
    closed_form = math.sqrt((1 - abs(lam)) / (1 + abs(lam)))
    if abs(a_root - closed_form) > 1e-10:
        raise ArithmeticError(
            f"bisection root {a_root} disagrees with the closed form {closed_form}"
        )
    return 1j * a_root


def quantization_residual(spec: LatticeSpec, alpha: complex) -> complex:
    """Wall-boundary quantization residual alpha^(2(L-x0)) - ratio of Bloch values.

    Vanishes exactly on the admissible band states. Bound states in a gap are
    NOT roots of this condition; they are fixed by the local single-site
    equation instead (see ``edge_alpha``), and evaluating this residual at the
    in-gap alpha gives an O(1) value or a degenerate 0/0 Bloch ratio.
    """
    lam = ssh_lambda_of(spec)
    a = complex(alpha)
    bloch = ssh_bloch(a, lam, 0)
    denom = bloch.plus_at(spec.L) * bloch.minus_at(spec.x0)
    numer = bloch.plus_at(spec.x0) * bloch.minus_at(spec.L)
    if denom == 0:
        raise SingularityError("Bloch component vanishes; boundary quantization undefined")
    return a ** (2 * (spec.L - spec.x0)) - numer / denom


def _require_ssh(spec: LatticeSpec, lam: float | None):
    found = ssh_lambda_of(spec)
    if lam is not None and abs(found - lam) > 1e-10:
        raise InvalidSpecError(f"spec encodes lambda={found}, caller passed {lam}")


def full_basis(spec: LatticeSpec, lam: float) -> list[EigenStateRecord]:
    """All M eigenstates of a commensurate odd-length SSH chain.

    Both energy signs over the quasimomenta in (0, pi/2) give the M-1 band
    states (the reflected momenta k > pi/2 reproduce the same states up to a
    phase), and the missing k = pi/2 slot is the in-gap zero mode. Records are
    sorted by (energy, quasimomentum).
    """
    _require_ssh(spec, lam)
    if not spec.is_commensurate:
        raise UnsupportedPathError("closed-form basis requires a commensurate chain")
    ks = bulk_quasimomenta(spec)
    ks = ks[ks < np.pi / 2 - 1e-12]
    records = []
    for k in ks:
        alpha = cmath.exp(1j * k)
        for s in (0, 1):
            energy = ssh_energy(alpha, lam, s)
            bloch = ssh_bloch(alpha, lam, s)
            records.append(assemble_state(spec, bloch, alpha, energy, band=s, kind="bulk"))
    records.append(in_gap_record(spec, lam))

    def sort_key(rec: EigenStateRecord):
        k_eff = cmath.phase(rec.alpha) if rec.kind == "bulk" else math.pi / 2
        return (rec.energy, k_eff)

    return sorted(records, key=sort_key)


def basis_matrix(records: list[EigenStateRecord]) -> np.ndarray:
    """Stack record amplitudes as rows (one row per state)."""
    return np.array([rec.coeffs for rec in records])


def eigen_residual(spec: LatticeSpec, record: EigenStateRecord) -> float:
    """Max-norm of H psi - E psi for one record."""
    h = build_hamiltonian(spec)
    return float(np.max(np.abs(h @ record.coeffs - record.energy * record.coeffs)))


# ---------------------------------------------------------------------------
# Generic unit-cell route (validation path for arbitrary tau)
# ---------------------------------------------------------------------------

def generic_bloch(spec: LatticeSpec, alpha: complex, energy: float) -> tuple[float, np.ndarray]:
    """Bloch components for a trial (alpha, energy) by closing one unit cell.

    Writes the single-branch ansatz phi(x) alpha^x into the local Schroedinger
    equation at each residue of one cell, imposes periodicity phi(x+tau) =
    phi(x), and solves the resulting homogeneous system. Returns the smallest
    singular value (zero iff the trial pair is on the dispersion) and the
    gauge-fixed null vector. Desk-scale validation path; the SSH closed forms
    above are the production route.
    """
    tau = spec.tau
    a = complex(alpha)
    if a == 0:
        raise DomainError("alpha must be nonzero")
    sites = spec.sites()
    bonds = np.arange(spec.x0 + 1, spec.L - 1)
    # residue-indexed cell pattern, read away from the walls
    t_res = np.zeros(tau, dtype=complex)
    mu_res = np.zeros(tau)
    mid = len(bonds) // 2
    for r in range(tau):
        matches = bonds[(bonds % tau) == r]
        if len(matches) == 0:
            raise InvalidSpecError("chain too short to contain one full unit cell of bonds")
        pick = matches[np.argmin(np.abs(matches - bonds[mid]))]
        t_res[r] = spec.t[pick - (spec.x0 + 1)]
        site_matches = sites[(sites % tau) == r]
        mu_res[r] = spec.mu[site_matches[len(site_matches) // 2] - (spec.x0 + 1)]
    cell = np.zeros((tau, tau), dtype=complex)
    for r in range(tau):
        cell[r, (r + 1) % tau] += t_res[r] * a
        cell[r, (r - 1) % tau] += np.conj(t_res[(r - 1) % tau]) / a
        cell[r, r] += mu_res[r] - energy
    _, svals, vh = np.linalg.svd(cell)
    phi = vh[-1].conj()
    lead = np.flatnonzero(np.abs(phi) > 1e-12)
    if len(lead):
        phi = phi / phi[lead[0]]
    return float(svals[-1]), phi
