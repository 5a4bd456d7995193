#pragma once

// Physical constants (CODATA 2018) and the unit conventions used throughout:
// lengths in nm, energies in eV. Every conversion lives here.

namespace pdanet::constants {

inline constexpr double hbar_Js = 1.054571817e-34;     // J*s
inline constexpr double electron_mass_kg = 9.1093837015e-31;
inline constexpr double eV_J = 1.602176634e-19;

// hbar^2 / (2 m_e) expressed in eV*nm^2; the only place kg/J/m enter.
inline constexpr double hbar2_over_2me_eVnm2 =
    hbar_Js * hbar_Js / (2.0 * electron_mass_kg) / eV_J * 1e18;

inline constexpr double pi = 3.14159265358979323846;

} // namespace pdanet::constants
