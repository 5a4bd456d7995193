#include "pdanet/quality_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pdanet::metrics {

std::vector<double> to_gray255(const ScalarField2D& img) {
  std::vector<double> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    out[i] = std::round(std::clamp(img.values[i], 0.0, 1.0) * 255.0);
  return out;
}

double mse(const ScalarField2D& a, const ScalarField2D& b) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument("mse: shape mismatch");
  const auto ga = to_gray255(a), gb = to_gray255(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < ga.size(); ++i) {
    const double d = ga[i] - gb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(ga.size());
}

double psnr(double mse_value) {
  if (mse_value < 0) throw std::domain_error("psnr: mse must be >= 0");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse_value);
}

namespace {

std::vector<double> gaussian_kernel_1d(int size, double sigma) {
  std::vector<double> k(size);
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

int reflect(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

// separable filter, reflect padding, same-size output
std::vector<double> filter_same(const std::vector<double>& src, int h, int w,
                                const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) acc += k[t + r] * src[y * w + reflect(x + t, w)];
      tmp[y * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) acc += k[t + r] * tmp[reflect(y + t, h) * w + x];
      out[y * w + x] = acc;
    }
  return out;
}

// separable filter, valid-mode output (no padding)
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& k, int& oh, int& ow) {
  const int n = static_cast<int>(k.size());
  oh = h - n + 1;
  ow = w - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow), out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += k[t] * src[y * w + x + t];
      tmp[y * ow + x] = acc;
    }
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += k[t] * tmp[(y + t) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

} // namespace

double ssim(const ScalarField2D& a, const ScalarField2D& b, const SsimConfig& cfg) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument("ssim: shape mismatch");
  if (a.height < cfg.window || a.width < cfg.window)
    throw std::invalid_argument("ssim: image smaller than the window");

  const auto ga = to_gray255(a), gb = to_gray255(b);
  const int h = a.height, w = a.width;
  const auto k = gaussian_kernel_1d(cfg.window, cfg.sigma);

  std::vector<double> aa(ga.size()), bb(ga.size()), ab(ga.size());
  for (std::size_t i = 0; i < ga.size(); ++i) {
    aa[i] = ga[i] * ga[i];
    bb[i] = gb[i] * gb[i];
    ab[i] = ga[i] * gb[i];
  }
  int oh = 0, ow = 0;
  const auto mu_a = filter_valid(ga, h, w, k, oh, ow);
  const auto mu_b = filter_valid(gb, h, w, k, oh, ow);
  const auto m_aa = filter_valid(aa, h, w, k, oh, ow);
  const auto m_bb = filter_valid(bb, h, w, k, oh, ow);
  const auto m_ab = filter_valid(ab, h, w, k, oh, ow);

  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = m_aa[i] - ma * ma;
    const double vb = m_bb[i] - mb * mb;
    const double cov = m_ab[i] - ma * mb;
    acc += ((2 * ma * mb + cfg.c1) * (2 * cov + cfg.c2)) /
           ((ma * ma + mb * mb + cfg.c1) * (va + vb + cfg.c2));
  }
  return acc / static_cast<double>(mu_a.size());
}

// --- MSCN and distribution fits ------------------------------------------------

std::vector<double> mscn_map(const std::vector<double>& gray, int h, int w) {
  const auto k = gaussian_kernel_1d(7, 7.0 / 6.0);
  const auto mu = filter_same(gray, h, w, k);
  std::vector<double> sq(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) sq[i] = gray[i] * gray[i];
  const auto mu_sq = filter_same(sq, h, w, k);
  std::vector<double> out(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double sigma = std::sqrt(std::abs(mu_sq[i] - mu[i] * mu[i]));
    out[i] = (gray[i] - mu[i]) / (sigma + 1.0);
  }
  return out;
}

namespace {

// precomputed ratio grids over alpha in [0.2, 10] step 0.001
struct GammaGrids {
  std::vector<double> alpha, ggd_ratio, aggd_ratio;
  GammaGrids() {
    for (double g = 0.2; g <= 10.0 + 1e-12; g += 0.001) {
      alpha.push_back(g);
      const double g1 = std::tgamma(1.0 / g), g2 = std::tgamma(2.0 / g),
                   g3 = std::tgamma(3.0 / g);
      ggd_ratio.push_back(g1 * g3 / (g2 * g2));
      aggd_ratio.push_back(g2 * g2 / (g1 * g3));
    }
  }
};

const GammaGrids& grids() {
  static const GammaGrids g;
  return g;
}

double grid_argmin(const std::vector<double>& grid, const std::vector<double>& alphas,
                   double target) {
  std::size_t best = 0;
  double best_d = std::abs(grid[0] - target);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d = std::abs(grid[i] - target);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return alphas[best];
}

} // namespace

GgdFit fit_ggd(const std::vector<double>& x) {
  double sigma_sq = 0.0, e_abs = 0.0;
  for (double v : x) {
    sigma_sq += v * v;
    e_abs += std::abs(v);
  }
  sigma_sq /= static_cast<double>(x.size());
  e_abs /= static_cast<double>(x.size());
  if (e_abs < 1e-12 || sigma_sq < 1e-14) return {2.0, 0.0}; // degenerate flat input
  const double rho = sigma_sq / (e_abs * e_abs);
  return {grid_argmin(grids().ggd_ratio, grids().alpha, rho), sigma_sq};
}

AggdFit fit_aggd(const std::vector<double>& x) {
  double left_sq = 0.0, right_sq = 0.0, e_abs = 0.0, e_sq = 0.0;
  std::size_t n_left = 0, n_right = 0;
  for (double v : x) {
    if (v < 0) {
      left_sq += v * v;
      ++n_left;
    } else if (v > 0) {
      right_sq += v * v;
      ++n_right;
    }
    e_abs += std::abs(v);
    e_sq += v * v;
  }
  const double n = static_cast<double>(x.size());
  e_abs /= n;
  e_sq /= n;
  if (e_sq < 1e-14 || n_left == 0 || n_right == 0) return {2.0, 0.0, 0.0, 0.0};

  AggdFit fit;
  fit.sigma_l = std::sqrt(left_sq / static_cast<double>(n_left));
  fit.sigma_r = std::sqrt(right_sq / static_cast<double>(n_right));
  const double gammahat = fit.sigma_l / std::max(fit.sigma_r, 1e-12);
  const double rhat = e_abs * e_abs / e_sq;
  const double rhatnorm = rhat * (gammahat * gammahat * gammahat + 1.0) * (gammahat + 1.0) /
                          ((gammahat * gammahat + 1.0) * (gammahat * gammahat + 1.0));
  fit.alpha = grid_argmin(grids().aggd_ratio, grids().alpha, rhatnorm);
  const double g1 = std::tgamma(1.0 / fit.alpha), g2 = std::tgamma(2.0 / fit.alpha),
               g3 = std::tgamma(3.0 / fit.alpha);
  fit.mean_param = (fit.sigma_r - fit.sigma_l) * (g2 / g1) * std::sqrt(g1 / g3);
  return fit;
}

// --- PIQE -----------------------------------------------------------------------

namespace {

double variance_of(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

double std_of(const double* v, int n, int stride) {
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += v[i * stride];
  mean /= n;
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = v[i * stride] - mean;
    var += d * d;
  }
  return std::sqrt(var / n);
}

} // namespace

double piqe(const ScalarField2D& img, const PiqeConfig& cfg) {
  const int bs = cfg.block_size;
  const int by = img.height / bs, bx = img.width / bs;
  if (by < 1 || bx < 1 || by * bx < 2)
    throw std::invalid_argument("piqe: image too small for two blocks");

  const auto gray = to_gray255(img);
  const auto mscn = mscn_map(gray, img.height, img.width);

  double dist_score = 0.0;
  int n_distorted = 0;
  std::vector<double> block(static_cast<std::size_t>(bs) * bs);
  const int cells = 4; // sub-block grid for the noise homogeneity test
  std::vector<double> cell_var(static_cast<std::size_t>(cells) * cells);

  for (int gy = 0; gy < by; ++gy)
    for (int gx = 0; gx < bx; ++gx) {
      for (int r = 0; r < bs; ++r)
        for (int c = 0; c < bs; ++c)
          block[r * bs + c] = mscn[(gy * bs + r) * img.width + (gx * bs + c)];
      const double v = variance_of(block);
      if (v <= cfg.activity_threshold) continue; // uniform block

      // noticeable artifact: a flat segment along any block edge
      bool impaired = false;
      const int seg = cfg.segment_length;
      for (int start = 0; start + seg <= bs && !impaired; ++start) {
        if (std_of(&block[start], seg, 1) < cfg.segment_threshold ||              // top row
            std_of(&block[(bs - 1) * bs + start], seg, 1) < cfg.segment_threshold || // bottom
            std_of(&block[start * bs], seg, bs) < cfg.segment_threshold ||        // left col
            std_of(&block[start * bs + bs - 1], seg, bs) < cfg.segment_threshold) // right
          impaired = true;
      }

      // noise: strong activity spread homogeneously across the block
      bool noisy = false;
      if (!impaired) {
        const int cell = bs / cells;
        std::vector<double> cv(static_cast<std::size_t>(cell) * cell);
        for (int cy = 0; cy < cells; ++cy)
          for (int cx = 0; cx < cells; ++cx) {
            for (int r = 0; r < cell; ++r)
              for (int c = 0; c < cell; ++c)
                cv[r * cell + c] = block[(cy * cell + r) * bs + (cx * cell + c)];
            cell_var[cy * cells + cx] = variance_of(cv);
          }
        double mean_cv = 0.0;
        for (double x : cell_var) mean_cv += x;
        mean_cv /= cell_var.size();
        const double disp = std::sqrt(variance_of(cell_var)) / std::max(mean_cv, 1e-12);
        noisy = disp < cfg.noise_dispersion;
      }

      if (impaired) {
        dist_score += std::clamp(1.0 - v, 0.0, 1.0);
        ++n_distorted;
      } else if (noisy) {
        dist_score += std::clamp(v, 0.0, 1.0);
        ++n_distorted;
      }
    }

  return std::clamp(100.0 * dist_score / (n_distorted + 1.0), 0.0, 100.0);
}

// --- BRISQUE ---------------------------------------------------------------------

namespace {

void features_one_scale(const std::vector<double>& gray, int h, int w, double* out) {
  const auto mscn = mscn_map(gray, h, w);
  const auto g = fit_ggd(mscn);
  out[0] = g.alpha;
  out[1] = g.sigma_sq;

  // orientation products: horizontal, vertical, main diagonal, anti-diagonal
  const int shifts[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  for (int o = 0; o < 4; ++o) {
    const int dy = shifts[o][0], dx = shifts[o][1];
    std::vector<double> prod;
    prod.reserve(mscn.size());
    for (int y = 0; y + dy < h; ++y)
      for (int x = std::max(0, -dx); x + dx < w && x < w; ++x)
        prod.push_back(mscn[y * w + x] * mscn[(y + dy) * w + (x + dx)]);
    const auto a = fit_aggd(prod);
    out[2 + o * 4 + 0] = a.alpha;
    out[2 + o * 4 + 1] = a.mean_param;
    out[2 + o * 4 + 2] = a.sigma_l * a.sigma_l;
    out[2 + o * 4 + 3] = a.sigma_r * a.sigma_r;
  }
}

std::vector<double> downsample2(const std::vector<double>& src, int h, int w, int& oh,
                                int& ow) {
  oh = h / 2;
  ow = w / 2;
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      out[y * ow + x] = 0.25 * (src[2 * y * w + 2 * x] + src[2 * y * w + 2 * x + 1] +
                                src[(2 * y + 1) * w + 2 * x] + src[(2 * y + 1) * w + 2 * x + 1]);
  return out;
}

} // namespace

std::array<double, 36> brisque_features(const ScalarField2D& img) {
  if (img.height < 16 || img.width < 16)
    throw std::invalid_argument("brisque: image too small");
  std::array<double, 36> feats{};
  const auto gray = to_gray255(img);
  features_one_scale(gray, img.height, img.width, feats.data());
  int oh = 0, ow = 0;
  const auto half = downsample2(gray, img.height, img.width, oh, ow);
  features_one_scale(half, oh, ow, feats.data() + 18);
  return feats;
}

double BrisqueModel::score(const std::array<double, 36>& features) const {
  std::array<double, 36> scaled{};
  for (int i = 0; i < 36; ++i) {
    const double span = feat_max[i] - feat_min[i];
    scaled[i] = span > 0 ? -1.0 + 2.0 * (features[i] - feat_min[i]) / span : 0.0;
  }
  double acc = -rho;
  for (std::size_t j = 0; j < svs.size(); ++j) {
    double d2 = 0.0;
    for (int i = 0; i < 36; ++i) {
      const double d = scaled[i] - svs[j][i];
      d2 += d * d;
    }
    acc += alphas[j] * std::exp(-gamma * d2);
  }
  return acc;
}

double brisque(const ScalarField2D& img, const BrisqueModel& model) {
  return model.score(brisque_features(img));
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}
void put_f64(std::ostream& os, double v) {
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(&v), 8); // little-endian host
}
double get_f64(std::istream& is) {
  double v;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

} // namespace

void save_brisque_model(const std::filesystem::path& path, const BrisqueModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_brisque_model: cannot open " + path.string());
  os.write("BRSQ", 4);
  put_u32(os, 1);
  put_u32(os, 0); // RBF kernel
  put_f64(os, model.gamma);
  put_f64(os, model.rho);
  put_u32(os, 36);
  put_u32(os, static_cast<std::uint32_t>(model.svs.size()));
  for (double v : model.feat_min) put_f64(os, v);
  for (double v : model.feat_max) put_f64(os, v);
  for (std::size_t j = 0; j < model.svs.size(); ++j) {
    put_f64(os, model.alphas[j]);
    for (double v : model.svs[j]) put_f64(os, v);
  }
}

BrisqueModel load_brisque_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("brisque model: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "BRSQ", 4) != 0)
    throw std::runtime_error("brisque model: bad magic in " + path.string());
  if (get_u32(is) != 1) throw std::runtime_error("brisque model: unsupported version");
  if (get_u32(is) != 0) throw std::runtime_error("brisque model: unsupported kernel");
  BrisqueModel m;
  m.gamma = get_f64(is);
  m.rho = get_f64(is);
  const auto n_feat = get_u32(is);
  const auto n_sv = get_u32(is);
  if (n_feat != 36) throw std::runtime_error("brisque model: expected 36 features");
  for (auto& v : m.feat_min) v = get_f64(is);
  for (auto& v : m.feat_max) v = get_f64(is);
  m.alphas.resize(n_sv);
  m.svs.resize(n_sv);
  for (std::uint32_t j = 0; j < n_sv; ++j) {
    m.alphas[j] = get_f64(is);
    for (auto& v : m.svs[j]) v = get_f64(is);
  }
  if (!is) throw std::runtime_error("brisque model: truncated file " + path.string());
  return m;
}

// --- report ----------------------------------------------------------------------

MetricReport evaluate_suite(const std::vector<ScalarField2D>& images,
                            const std::vector<std::string>& ids,
                            const std::vector<ScalarField2D>* reference,
                            const SsimConfig& ssim_cfg, const PiqeConfig& piqe_cfg,
                            const BrisqueModel* model) {
  if (reference && reference->size() != images.size())
    throw std::invalid_argument("evaluate_suite: image/reference set size mismatch");
  if (!ids.empty() && ids.size() != images.size())
    throw std::invalid_argument("evaluate_suite: id list size mismatch");

  MetricReport report;
  report.full_reference = reference != nullptr;
  report.count = static_cast<int>(images.size());

  BrisqueModel fallback;
  const BrisqueModel* brisque_model = model;
  if (!report.full_reference && !brisque_model) {
    fallback = reference_brisque_model();
    brisque_model = &fallback;
  }

  for (std::size_t i = 0; i < images.size(); ++i) {
    MetricRow row;
    row.id = ids.empty() ? std::to_string(i) : ids[i];
    if (report.full_reference) {
      row.mse = mse(images[i], (*reference)[i]);
      row.psnr = psnr(row.mse);
      row.ssim = ssim(images[i], (*reference)[i], ssim_cfg);
      report.mean_mse += row.mse;
      report.mean_psnr += row.psnr;
      report.mean_ssim += row.ssim;
    } else {
      row.piqe = piqe(images[i], piqe_cfg);
      row.brisque = brisque(images[i], *brisque_model);
      report.mean_piqe += row.piqe;
      report.mean_brisque += row.brisque;
    }
    report.rows.push_back(row);
  }
  if (report.count > 0) {
    report.mean_mse /= report.count;
    report.mean_psnr /= report.count;
    report.mean_ssim /= report.count;
    report.mean_piqe /= report.count;
    report.mean_brisque /= report.count;
  }
  return report;
}

namespace {
std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
} // namespace

void write_report(const std::filesystem::path& table_path,
                  const std::filesystem::path& records_path, const MetricReport& report) {
  std::ofstream table(table_path);
  std::ofstream records(records_path);
  if (!table || !records) throw std::runtime_error("write_report: cannot open outputs");

  if (report.full_reference) {
    table << "id\tMSE\tPSNR\tSSIM\n";
    for (const auto& r : report.rows)
      table << r.id << '\t' << fmt(r.mse) << '\t' << fmt(r.psnr) << '\t' << fmt(r.ssim)
            << '\n';
    table << "mean\t" << fmt(report.mean_mse) << '\t' << fmt(report.mean_psnr) << '\t'
          << fmt(report.mean_ssim) << '\n';
    for (const auto& r : report.rows)
      records << "{\"id\":\"" << r.id << "\",\"mse\":" << fmt(r.mse) << ",\"psnr\":\""
              << fmt(r.psnr) << "\",\"ssim\":" << fmt(r.ssim) << "}\n";
  } else {
    table << "id\tBRISQUE\tPIQE\n";
    for (const auto& r : report.rows)
      table << r.id << '\t' << fmt(r.brisque) << '\t' << fmt(r.piqe) << '\n';
    table << "mean\t" << fmt(report.mean_brisque) << '\t' << fmt(report.mean_piqe) << '\n';
    for (const auto& r : report.rows)
      records << "{\"id\":\"" << r.id << "\",\"brisque\":" << fmt(r.brisque)
              << ",\"piqe\":" << fmt(r.piqe) << "}\n";
  }
}

} // namespace pdanet::metrics
