"""Simplified thermomechanical post-processing of a rod temperature field.

Per-axial-slice generalized plane strain: classical thick-walled-cylinder
thermoelastic solution for the cladding annulus (solid-cylinder variant for
the pellet), Norton secondary thermal creep, and anisotropic cladding thermal
expansion. Irradiation effects are deliberately zero.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .conduction import TemperatureField
from .core import MaterialParams
from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class SliceStress:
    r: np.ndarray
    sigma_r: np.ndarray
    sigma_theta: np.ndarray
    sigma_z: np.ndarray
    eps_theta_elastic: np.ndarray


@dataclass(frozen=True)
class StrainReport:
    """Cladding hoop-strain components at the hottest axial location."""

    thermal: float         # thermal expansion hoop strain [-]
    creep: float           # thermal creep hoop strain [-]
    elastic: float         # elastic hoop strain [-]
    irradiation_growth: float  # always 0 in the simplified model [-]
    total: float
    location: tuple        # (r, z) of evaluation [m]
    run_time: float        # wall-clock [s]


@dataclass(frozen=True)
class StressField:
    """Stress components on the rod mesh (compressive negative)."""

    mesh: object
    fuel_sigma_r: np.ndarray      # (nz_fuel, nr_fuel)
    fuel_sigma_theta: np.ndarray
    fuel_sigma_z: np.ndarray
    clad_sigma_r: np.ndarray      # (nz, nr_clad)
    clad_sigma_theta: np.ndarray
    clad_sigma_z: np.ndarray


def thermal_expansion_strain(field: TemperatureField, m: MaterialParams
                             ) -> tuple[np.ndarray, np.ndarray]:
    """Hoop thermal-expansion strain fields (fuel isotropic, cladding alpha_theta)."""
    floor = m.T_ref - 50.0
    if field.T_fuel.min() < floor or field.T_clad.min() < floor:
        raise DomainError(f"temperature below T_ref - 50 K = {floor} K")
    eps_fuel = m.alpha_fuel * (field.T_fuel - m.T_ref)
    eps_clad = m.alpha_theta * (field.T_clad - m.T_ref)
    return eps_fuel, eps_clad


def lame_thermoelastic_slice(r: np.ndarray, T: np.ndarray, P_in: float,
                             P_out: float, E: float, nu: float,
                             alpha: float) -> SliceStress:
    """Thick-walled cylinder under radial temperature profile and pressures.

    Generalized plane strain with zero net axial force; closed-end pressure
    contribution to sigma_z. Thermal integrals by trapezoid on the given grid.
    """
    r = np.asarray(r, float)
    T = np.asarray(T, float)
    a, b = float(r[0]), float(r[-1])
    if not (a < b) or r.size < 2:
        raise ConfigurationError("degenerate annulus: need r strictly increasing")
    K = alpha * E / (1.0 - nu)
    I = cumulative_trapezoid(T * r, r, initial=0.0)   # int_a^r T r dr
    Ib = float(I[-1])
    denom = b * b - a * a

    sig_r_th = K * ((r * r - a * a) / (r * r * denom) * Ib - I / (r * r))
    sig_t_th = K * ((r * r + a * a) / (r * r * denom) * Ib + I / (r * r) - T)
    sig_z_th = K * (2.0 * Ib / denom - T)
    # sigma_z is defined up to the uniform GPS constant; zero net axial force
    # over the annulus fixes it
    c = 2.0 * trapezoid(sig_z_th * r, r) / denom
    sig_z_th = sig_z_th - c

    lam_A = (P_in * a * a - P_out * b * b) / denom
    lam_B = (P_in - P_out) * a * a * b * b / denom
    sig_r = sig_r_th + lam_A - lam_B / (r * r)
    sig_t = sig_t_th + lam_A + lam_B / (r * r)
    sig_z = sig_z_th + lam_A  # closed-end axial force balance

    eps_t = (sig_t - nu * (sig_r + sig_z)) / E
    return SliceStress(r=r, sigma_r=sig_r, sigma_theta=sig_t, sigma_z=sig_z,
                       eps_theta_elastic=eps_t)


def solid_cylinder_slice(r: np.ndarray, T: np.ndarray, P_out: float, E: float,
                         nu: float, alpha: float) -> SliceStress:
    """Solid-cylinder variant (pellet): external pressure only."""
    r = np.asarray(r, float)
    T = np.asarray(T, float)
    b = float(r[-1])
    if r[0] != 0.0 or r.size < 2:
        raise ConfigurationError("solid slice needs a radial grid starting at 0")
    K = alpha * E / (1.0 - nu)
    I = cumulative_trapezoid(T * r, r, initial=0.0)
    Ib = float(I[-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        I_over_r2 = np.where(r > 0.0, I / np.maximum(r, 1e-300) ** 2, 0.5 * T[0])
    sig_r_th = K * (Ib / (b * b) - I_over_r2)
    sig_t_th = K * (Ib / (b * b) + I_over_r2 - T)
    sig_z_th = K * (2.0 * Ib / (b * b) - T)
    c = 2.0 * trapezoid(sig_z_th * r, r) / (b * b)
    sig_z_th = sig_z_th - c

    sig_r = sig_r_th - P_out
    sig_t = sig_t_th - P_out
    sig_z = sig_z_th - P_out
    eps_t = (sig_t - nu * (sig_r + sig_z)) / E
    return SliceStress(r=r, sigma_r=sig_r, sigma_theta=sig_t, sigma_z=sig_z,
                       eps_theta_elastic=eps_t)


def thermal_creep_increment(sigma_theta: float, T: float, duration: float,
                            m: MaterialParams) -> float:
    """Single-increment Norton secondary creep hoop strain."""
    if duration < 0.0:
        raise DomainError("duration must be >= 0")
    return (m.creep_A * abs(sigma_theta) ** m.creep_n * np.sign(sigma_theta)
            * np.exp(-m.creep_QR / T) * duration)


def hoop_strain_summary(field: TemperatureField, m: MaterialParams,
                        duration: float) -> StrainReport:
    """Cladding hoop-strain component breakdown at the hottest axial slice.

    Evaluated at the cladding outer surface of the axial node with the highest
    cladding temperature. Elastic and creep use the pressure-free
    (temperature-induced) slice stresses so each component isolates a thermal
    mechanism, mirroring the simplified-model decomposition.
    """
    t0 = time.perf_counter()
    mesh = field.mesh
    j = int(np.argmax(field.T_clad.max(axis=1)))
    T_slice = field.T_clad[j]
    floor = m.T_ref - 50.0
    if T_slice.min() < floor:
        raise DomainError(f"temperature below T_ref - 50 K = {floor} K")

    sl = lame_thermoelastic_slice(mesh.r_clad, T_slice, 0.0, 0.0,
                                  m.E_clad, m.nu_clad, m.alpha_theta)
    T_surf = float(T_slice[-1])
    thermal = m.alpha_theta * (T_surf - m.T_ref)
    elastic = float(sl.eps_theta_elastic[-1])
    creep = float(thermal_creep_increment(float(sl.sigma_theta[-1]), T_surf,
                                          duration, m))
    total = thermal + creep + elastic
    return StrainReport(thermal=thermal, creep=creep, elastic=elastic,
                        irradiation_growth=0.0, total=total,
                        location=(float(mesh.r_clad[-1]), float(mesh.z[j])),
                        run_time=time.perf_counter() - t0)


def stress_field(field: TemperatureField, P_gap: float, P_cool: float,
                 m: MaterialParams) -> StressField:
    """Slice-by-slice stress assembly over the whole rod mesh."""
    mesh = field.mesh
    fz = []
    for j in range(mesh.nz_fuel):
        fz.append(solid_cylinder_slice(mesh.r_fuel, field.T_fuel[j], P_gap,
                                       m.E_fuel, m.nu_fuel, m.alpha_fuel))
    cz = []
    for j in range(mesh.nz):
        cz.append(lame_thermoelastic_slice(mesh.r_clad, field.T_clad[j], P_gap,
                                           P_cool, m.E_clad, m.nu_clad,
                                           m.alpha_theta))
    return StressField(
        mesh=mesh,
        fuel_sigma_r=np.array([s.sigma_r for s in fz]),
        fuel_sigma_theta=np.array([s.sigma_theta for s in fz]),
        fuel_sigma_z=np.array([s.sigma_z for s in fz]),
        clad_sigma_r=np.array([s.sigma_r for s in cz]),
        clad_sigma_theta=np.array([s.sigma_theta for s in cz]),
        clad_sigma_z=np.array([s.sigma_z for s in cz]),
    )
