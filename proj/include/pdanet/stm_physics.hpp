#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdanet/field2d.hpp"

// Clean simulated STM images of the Cu(111) Shockley surface state: the
// scattered-wave interference (quasiparticle interference) around random
// point impurities, computed from the retarded Green's function. Two
// independent routes are provided: the continuum T-matrix closure and a
// brute-force lattice eigendecomposition used as its oracle.

namespace pdanet::stm {

using cdouble = std::complex<double>;

// Parabolic surface-state band: H0 = k^2/(2 m_eff m_e) - mu, probed at
// energy omega relative to mu, with spectral broadening eta.
struct SurfaceModel {
  double m_eff = 0.38;  // multiples of the bare electron mass
  double mu_eV = 0.45;  // chemical potential
  double omega_eV = 0.01; // probe energy (10 mV bias)
  double eta_eV = 0.002;  // finite broadening; sets ring damping
  double cutoff_nm = 0.25; // point-scatterer size; regularizes the on-site G0

  void validate() const;
};

struct Impurity {
  double x_nm = 0.0;
  double y_nm = 0.0;
  double strength_eVnm2 = 2.0; // delta-potential amplitude, sign = repulsive/attractive
};

struct ImpuritySet {
  std::vector<Impurity> impurities;

  int count() const { return static_cast<int>(impurities.size()); }
  // Checks positions against a field-of-view rectangle and strength finiteness.
  void validate(double x0_nm, double y0_nm, double w_nm, double h_nm) const;
};

// k = sqrt(2 m_eff m_e (omega + mu)) / hbar, in 1/nm.
// Throws std::domain_error when omega + mu <= 0 (no propagating states).
double fermi_wavevector(const SurfaceModel& model);

// Complex momentum at omega + i eta (branch with Im k >= 0).
cdouble complex_wavevector(const SurfaceModel& model);

// Density of states of the clean 2D gas, m_eff m_e / (2 pi hbar^2), in 1/(eV nm^2).
double clean_dos(const SurfaceModel& model);

// Free retarded propagator G0(r1, r2) = -i m/(2 hbar^2) H0^(1)(k |r1 - r2|).
// Throws std::domain_error at coincident points; the regularized on-site
// value is g0_onsite below.
cdouble free_greens_function(double x1_nm, double y1_nm, double x2_nm,
                             double y2_nm, const SurfaceModel& model);

// Momentum-cutoff (Lambda = 1/cutoff_nm) regularization of the log-divergent
// on-site value: g0 = -rho0 Log((Lambda^2 - k^2)/(-k^2)). Its imaginary part
// tends to -pi rho0 as eta -> 0.
cdouble g0_onsite(const SurfaceModel& model);

// T = (I - v G0_imp)^(-1) v with the regularized on-site value on the
// diagonal of G0_imp. Throws std::runtime_error (with a condition estimate)
// when the solve is singular or ill conditioned.
Eigen::MatrixXcd t_matrix_solve(const ImpuritySet& imps, const SurfaceModel& model);

struct RasterSpec {
  int height = 256;
  int width = 256;
  double extent_w_nm = 20.0;
  double extent_h_nm = 20.0;
  double origin_x_nm = 0.0;
  double origin_y_nm = 0.0;
};

// A(r, omega) = -(1/pi) Im G(r, r) on every grid point,
// G(r,r) = g0_onsite + sum_{jl} G0(r,R_j) T_jl G0(R_l,r). Distances to
// impurities are floored at the scatterer size to keep on-impurity pixels finite.
ScalarField2D ldos_map(const RasterSpec& grid, const ImpuritySet& imps,
                       const SurfaceModel& model);

// --- lattice oracle -------------------------------------------------------

struct LatticeSpec {
  int sites_x = 48;
  int sites_y = 48;
  double spacing_nm = 0.4;
};

inline constexpr int kMaxOracleSites = 64 * 64; // dense-eigensolve cap

// Brute-force LDOS on a discretized lattice: diagonalize H = H0 + V and sum
// psi* psi / (omega - E + i eta) over all eigenstates. Impurities land on
// their nearest lattice site with weight v / spacing^2.
// Throws std::length_error when the lattice exceeds the dense-solve cap.
ScalarField2D spectral_ldos_oracle(const LatticeSpec& lattice, const ImpuritySet& imps,
                                   const SurfaceModel& model);

// Same lattice Green's function diagonal via direct sparse resolvent
// inversion of (omega + i eta - H); the cross-check for the oracle.
ScalarField2D lattice_ldos_resolvent(const LatticeSpec& lattice, const ImpuritySet& imps,
                                     const SurfaceModel& model);

// Clean-lattice on-site Green's function at a given site, in continuum
// units (1/(eV nm^2), i.e. divided by spacing^2).
cdouble lattice_clean_onsite_g(const LatticeSpec& lattice, const SurfaceModel& model,
                               int site_x, int site_y);

// Cutoff for which the continuum g0_onsite matches a target real part.
// A point scatterer of strength v then has the same T-matrix on both the
// lattice and the continuum, which is what makes the two LDOS routes
// comparable on one grid.
double matched_cutoff(double target_re_g0, const SurfaceModel& model);

// --- dataset generation ----------------------------------------------------

struct SceneConfig {
  RasterSpec grid;
  SurfaceModel model;
  int impurity_count_min = 3;
  int impurity_count_max = 12;
  double strength_min_eVnm2 = 1.0; // magnitude range; sign drawn separately
  double strength_max_eVnm2 = 4.0;
  double margin_nm = 0.5; // impurities stay this far inside the field of view
};

struct GeneratedImage {
  ScalarField2D image;     // normalized to [0,1]
  ImpuritySet impurities;
  std::uint64_t seed = 0;  // per-image seed
  double ldos_min = 0.0;   // pre-normalization range
  double ldos_max = 0.0;
};

ImpuritySet sample_impurities(const SceneConfig& cfg, std::uint64_t image_seed);

// Deterministic given (cfg, seed): image i depends only on derive_seed(seed, i),
// so parallel generation order never changes results. Scenes whose T-matrix
// solve fails are skipped (and counted) while topping up to `count`.
struct DatasetStats {
  int attempted = 0;
  int skipped = 0;
};
std::vector<GeneratedImage> generate_clear_dataset(int count, const SceneConfig& cfg,
                                                   std::uint64_t seed,
                                                   DatasetStats* stats = nullptr);

} // namespace pdanet::stm
