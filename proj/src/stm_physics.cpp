#include "pdanet/stm_physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <omp.h>

#include "pdanet/bessel.hpp"
#include "pdanet/constants.hpp"
#include "pdanet/rng.hpp"

extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork,
             int* info);
}

namespace pdanet::stm {

namespace {

// hbar^2 / (2 m_eff m_e) in eV nm^2 for this model.
double kinetic_coeff(const SurfaceModel& m) {
  return constants::hbar2_over_2me_eVnm2 / m.m_eff;
}

} // namespace

void SurfaceModel::validate() const {
  if (!(m_eff > 0.0)) throw std::invalid_argument("SurfaceModel: m_eff must be > 0");
  if (!(eta_eV > 0.0)) throw std::invalid_argument("SurfaceModel: eta must be > 0");
  if (!(cutoff_nm > 0.0)) throw std::invalid_argument("SurfaceModel: cutoff must be > 0");
  if (!(omega_eV + mu_eV > 0.0))
    throw std::domain_error("SurfaceModel: omega + mu must be > 0 (propagating states)");
}

void ImpuritySet::validate(double x0_nm, double y0_nm, double w_nm, double h_nm) const {
  for (const auto& imp : impurities) {
    if (!std::isfinite(imp.strength_eVnm2) || imp.strength_eVnm2 == 0.0)
      throw std::invalid_argument("ImpuritySet: strength must be finite and nonzero");
    if (imp.x_nm < x0_nm || imp.x_nm > x0_nm + w_nm || imp.y_nm < y0_nm ||
        imp.y_nm > y0_nm + h_nm)
      throw std::invalid_argument("ImpuritySet: impurity outside the field of view");
  }
}

double fermi_wavevector(const SurfaceModel& model) {
  if (!(model.omega_eV + model.mu_eV > 0.0))
    throw std::domain_error("fermi_wavevector: omega + mu <= 0 (evanescent regime)");
  return std::sqrt((model.omega_eV + model.mu_eV) / kinetic_coeff(model));
}

cdouble complex_wavevector(const SurfaceModel& model) {
  const cdouble e(model.omega_eV + model.mu_eV, model.eta_eV);
  cdouble k = std::sqrt(e / kinetic_coeff(model));
  if (k.imag() < 0.0) k = -k;
  return k;
}

double clean_dos(const SurfaceModel& model) {
  return 1.0 / (4.0 * constants::pi * kinetic_coeff(model));
}

cdouble free_greens_function(double x1_nm, double y1_nm, double x2_nm, double y2_nm,
                             const SurfaceModel& model) {
  const double dx = x1_nm - x2_nm, dy = y1_nm - y2_nm;
  const double r = std::hypot(dx, dy);
  if (r == 0.0)
    throw std::domain_error("free_greens_function: coincident points; use g0_onsite");
  const cdouble k = complex_wavevector(model);
  const double pref = constants::pi * clean_dos(model); // m/(2 hbar^2)
  return cdouble(0.0, -pref) * hankel1_0(k * r);
}

cdouble g0_onsite(const SurfaceModel& model) {
  const double rho0 = clean_dos(model);
  const cdouble k = complex_wavevector(model);
  const cdouble k2 = k * k;
  const double lambda = 1.0 / model.cutoff_nm;
  return -rho0 * std::log((cdouble(lambda * lambda, 0.0) - k2) / (-k2));
}

Eigen::MatrixXcd t_matrix_solve(const ImpuritySet& imps, const SurfaceModel& model) {
  model.validate();
  const int n = imps.count();
  if (n < 1) throw std::invalid_argument("t_matrix_solve: need at least one impurity");

  Eigen::MatrixXcd g0(n, n);
  const cdouble onsite = g0_onsite(model);
  for (int j = 0; j < n; ++j) {
    g0(j, j) = onsite;
    for (int l = j + 1; l < n; ++l) {
      const auto& a = imps.impurities[j];
      const auto& b = imps.impurities[l];
      const cdouble g = free_greens_function(a.x_nm, a.y_nm, b.x_nm, b.y_nm, model);
      g0(j, l) = g;
      g0(l, j) = g; // scalar kernel is reciprocal
    }
  }

  Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    v(j, j) = imps.impurities[j].strength_eVnm2;
    lhs.row(j) -= v(j, j) * g0.row(j);
  }

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(lhs);
  const double rcond = lu.rcond();
  if (!lu.isInvertible() || !(rcond > 1e-12)) {
    throw std::runtime_error("t_matrix_solve: singular scattering matrix (rcond estimate " +
                             std::to_string(rcond) + ")");
  }
  return lu.solve(v);
}

ScalarField2D ldos_map(const RasterSpec& grid, const ImpuritySet& imps,
                       const SurfaceModel& model) {
  model.validate();
  imps.validate(grid.origin_x_nm, grid.origin_y_nm, grid.extent_w_nm, grid.extent_h_nm);

  ScalarField2D out(grid.height, grid.width, grid.extent_w_nm, grid.extent_h_nm);
  out.origin_x_nm = grid.origin_x_nm;
  out.origin_y_nm = grid.origin_y_nm;

  const double rho0 = clean_dos(model);
  const cdouble onsite = g0_onsite(model);
  const double base = -onsite.imag() / constants::pi;
  const int n = imps.count();

  if (n == 0) {
    std::fill(out.values.begin(), out.values.end(), base);
    return out;
  }

  const Eigen::MatrixXcd t = t_matrix_solve(imps, model);
  const cdouble k = complex_wavevector(model);
  const double pref = constants::pi * rho0; // m/(2 hbar^2)
  const double rmin = model.cutoff_nm;      // scatterer size floors the distance

#pragma omp parallel for schedule(static)
  for (int r = 0; r < grid.height; ++r) {
    std::vector<cdouble> g(n);
    for (int c = 0; c < grid.width; ++c) {
      const double x = out.x_of(c), y = out.y_of(r);
      for (int j = 0; j < n; ++j) {
        const auto& imp = imps.impurities[j];
        const double dist = std::max(std::hypot(x - imp.x_nm, y - imp.y_nm), rmin);
        g[j] = cdouble(0.0, -pref) * hankel1_0(k * dist);
      }
      cdouble corr(0.0, 0.0);
      for (int j = 0; j < n; ++j) {
        cdouble acc(0.0, 0.0);
        for (int l = 0; l < n; ++l) acc += t(j, l) * g[l];
        corr += g[j] * acc;
      }
      out.at(r, c) = base - corr.imag() / constants::pi;
    }
  }
  if (!out.all_finite()) throw std::runtime_error("ldos_map: non-finite LDOS value");
  return out;
}

// --- lattice oracle ---------------------------------------------------------

namespace {

// H = H0 + V discretized with the 5-point Laplacian; hopping t = hbar^2/(2 m a^2).
// Dirichlet boundaries. Returns per-site potential including the -mu shift
// folded into the diagonal.
Eigen::MatrixXd lattice_hamiltonian(const LatticeSpec& lat, const ImpuritySet& imps,
                                    const SurfaceModel& model) {
  const int nx = lat.sites_x, ny = lat.sites_y, n = nx * ny;
  const double a = lat.spacing_nm;
  const double t = kinetic_coeff(model) / (a * a);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  auto site = [nx](int ix, int iy) { return iy * nx + ix; };
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const int s = site(ix, iy);
      h(s, s) = 4.0 * t - model.mu_eV;
      if (ix + 1 < nx) h(s, site(ix + 1, iy)) = h(site(ix + 1, iy), s) = -t;
      if (iy + 1 < ny) h(s, site(ix, iy + 1)) = h(site(ix, iy + 1), s) = -t;
    }
  // Delta impurities land on the nearest site with weight v / a^2.
  for (const auto& imp : imps.impurities) {
    const int ix = std::clamp(static_cast<int>(std::floor(imp.x_nm / a)), 0, nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(imp.y_nm / a)), 0, ny - 1);
    h(site(ix, iy), site(ix, iy)) += imp.strength_eVnm2 / (a * a);
  }
  return h;
}

ScalarField2D field_from_diagonal(const LatticeSpec& lat, const Eigen::VectorXcd& diag,
                                  double spacing) {
  ScalarField2D out(lat.sites_y, lat.sites_x, lat.sites_x * spacing, lat.sites_y * spacing);
  // 1/a^2 converts the per-site Green's function to a density per unit area,
  // the same units ldos_map produces.
  const double per_area = 1.0 / (spacing * spacing);
  for (int iy = 0; iy < lat.sites_y; ++iy)
    for (int ix = 0; ix < lat.sites_x; ++ix)
      out.at(iy, ix) = -diag(iy * lat.sites_x + ix).imag() / constants::pi * per_area;
  return out;
}

void check_lattice_cap(const LatticeSpec& lat) {
  if (lat.sites_x * lat.sites_y > kMaxOracleSites)
    throw std::length_error("lattice oracle: exceeds dense-solve cap of 64x64 sites");
  if (lat.sites_x < 2 || lat.sites_y < 2 || !(lat.spacing_nm > 0.0))
    throw std::invalid_argument("lattice oracle: invalid lattice spec");
}

} // namespace

ScalarField2D spectral_ldos_oracle(const LatticeSpec& lattice, const ImpuritySet& imps,
                                   const SurfaceModel& model) {
  model.validate();
  check_lattice_cap(lattice);
  const int n = lattice.sites_x * lattice.sites_y;

  Eigen::MatrixXd h = lattice_hamiltonian(lattice, imps, model);

  // LAPACK divide-and-conquer eigensolver; the full spectrum is needed.
  Eigen::VectorXd evals(n);
  int info = 0, lwork = -1, liwork = -1;
  double lwork_query = 0.0;
  int liwork_query = 0;
  dsyevd_("V", "L", &n, h.data(), &n, evals.data(), &lwork_query, &lwork, &liwork_query,
          &liwork, &info);
  lwork = static_cast<int>(lwork_query);
  liwork = liwork_query;
  std::vector<double> work(static_cast<std::size_t>(lwork));
  std::vector<int> iwork(static_cast<std::size_t>(liwork));
  dsyevd_("V", "L", &n, h.data(), &n, evals.data(), work.data(), &lwork, iwork.data(),
          &liwork, &info);
  if (info != 0) throw std::runtime_error("spectral_ldos_oracle: dsyevd failed");

  // G_ii = sum_a |psi_a(i)|^2 / (omega - E_a + i eta), accumulated per state.
  const cdouble z(model.omega_eV, model.eta_eV);
  Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(n);
  for (int a = 0; a < n; ++a) {
    const cdouble w = 1.0 / (z - evals(a));
    diag += w * h.col(a).cwiseAbs2().cast<cdouble>();
  }
  return field_from_diagonal(lattice, diag, lattice.spacing_nm);
}

ScalarField2D lattice_ldos_resolvent(const LatticeSpec& lattice, const ImpuritySet& imps,
                                     const SurfaceModel& model) {
  model.validate();
  check_lattice_cap(lattice);
  const int n = lattice.sites_x * lattice.sites_y;
  const Eigen::MatrixXd h = lattice_hamiltonian(lattice, imps, model);

  Eigen::SparseMatrix<cdouble> a(n, n);
  {
    std::vector<Eigen::Triplet<cdouble>> trips;
    trips.reserve(static_cast<std::size_t>(5) * n);
    const cdouble z(model.omega_eV, model.eta_eV);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        if (r == c)
          trips.emplace_back(r, c, z - h(r, c));
        else if (h(r, c) != 0.0)
          trips.emplace_back(r, c, -h(r, c));
      }
    a.setFromTriplets(trips.begin(), trips.end());
  }

  Eigen::SparseLU<Eigen::SparseMatrix<cdouble>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("lattice_ldos_resolvent: sparse LU failed");
  Eigen::MatrixXcd inv = lu.solve(Eigen::MatrixXcd::Identity(n, n));
  return field_from_diagonal(lattice, inv.diagonal(), lattice.spacing_nm);
}

cdouble lattice_clean_onsite_g(const LatticeSpec& lattice, const SurfaceModel& model,
                               int site_x, int site_y) {
  model.validate();
  check_lattice_cap(lattice);
  const int n = lattice.sites_x * lattice.sites_y;
  const Eigen::MatrixXd h = lattice_hamiltonian(lattice, ImpuritySet{}, model);

  Eigen::SparseMatrix<cdouble> a(n, n);
  std::vector<Eigen::Triplet<cdouble>> trips;
  const cdouble z(model.omega_eV, model.eta_eV);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      if (r == c)
        trips.emplace_back(r, c, z - h(r, c));
      else if (h(r, c) != 0.0)
        trips.emplace_back(r, c, -h(r, c));
    }
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<cdouble>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("lattice_clean_onsite_g: sparse LU failed");
  const int s = site_y * lattice.sites_x + site_x;
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e(s) = 1.0;
  const Eigen::VectorXcd col = lu.solve(e);
  return col(s) / (lattice.spacing_nm * lattice.spacing_nm);
}

double matched_cutoff(double target_re_g0, const SurfaceModel& model) {
  // Re g0 = -rho0 ln|(Lambda^2 - z)/z| with z = k^2; invert for Lambda.
  const double rho0 = clean_dos(model);
  const cdouble k = complex_wavevector(model);
  const cdouble z = k * k;
  const double x = std::abs(z) * std::exp(-target_re_g0 / rho0);
  const double disc = x * x - z.imag() * z.imag();
  if (disc <= 0.0)
    throw std::domain_error("matched_cutoff: target real part unreachable");
  const double lambda2 = z.real() + std::sqrt(disc);
  if (lambda2 <= std::abs(z))
    throw std::domain_error("matched_cutoff: cutoff would fall below the wavevector");
  return 1.0 / std::sqrt(lambda2);
}

// --- dataset generation ------------------------------------------------------

ImpuritySet sample_impurities(const SceneConfig& cfg, std::uint64_t image_seed) {
  Rng rng(image_seed);
  const int n =
      static_cast<int>(rng.uniform_int(cfg.impurity_count_min, cfg.impurity_count_max));
  const double m = cfg.margin_nm;
  ImpuritySet set;
  set.impurities.reserve(n);
  for (int i = 0; i < n; ++i) {
    Impurity imp;
    imp.x_nm = rng.uniform(cfg.grid.origin_x_nm + m,
                           cfg.grid.origin_x_nm + cfg.grid.extent_w_nm - m);
    imp.y_nm = rng.uniform(cfg.grid.origin_y_nm + m,
                           cfg.grid.origin_y_nm + cfg.grid.extent_h_nm - m);
    const double mag = rng.uniform(cfg.strength_min_eVnm2, cfg.strength_max_eVnm2);
    imp.strength_eVnm2 = rng.uniform() < 0.5 ? mag : -mag;
    set.impurities.push_back(imp);
  }
  return set;
}

std::vector<GeneratedImage> generate_clear_dataset(int count, const SceneConfig& cfg,
                                                   std::uint64_t seed, DatasetStats* stats) {
  if (count < 1) throw std::invalid_argument("generate_clear_dataset: count must be >= 1");
  cfg.model.validate();

  std::vector<GeneratedImage> result;
  result.reserve(count);
  int attempt = 0, skipped = 0;
  while (static_cast<int>(result.size()) < count) {
    const std::uint64_t image_seed = derive_seed(seed, /*stream=*/1, attempt);
    ++attempt;
    GeneratedImage img;
    img.seed = image_seed;
    img.impurities = sample_impurities(cfg, image_seed);
    try {
      img.image = ldos_map(cfg.grid, img.impurities, cfg.model);
    } catch (const std::exception&) {
      ++skipped; // degenerate scene; draw a fresh one
      continue;
    }
    auto [lo, hi] = normalize_unit_range(img.image);
    img.ldos_min = lo;
    img.ldos_max = hi;
    result.push_back(std::move(img));
  }
  if (stats) {
    stats->attempted = attempt;
    stats->skipped = skipped;
  }
  return result;
}

} // namespace pdanet::stm
