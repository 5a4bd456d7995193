#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "pdanet/nn/tensor.hpp"

// Adversarial, cycle, and feature-alignment losses as pure functions of
// score maps (pre-sigmoid logits) and image tensors. Each returns its value
// and can emit d(value)/d(input); callers pick the sign for ascent/descent.
// Patch score maps are mean-reduced: every expectation averages over batch
// and patch positions together. log(sigmoid) goes through softplus so no
// log(0) can occur.

namespace pdanet::objectives {

enum class GeneratorLossMode { Saturating, NonSaturating };

inline std::string to_string(GeneratorLossMode m) {
  return m == GeneratorLossMode::Saturating ? "saturating" : "non_saturating";
}

namespace detail {

template <typename T>
T softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

template <typename T>
void check_finite(const nn::Tensor<T>& t, const char* who) {
  for (T v : t.v)
    if (!std::isfinite(static_cast<double>(v)))
      throw std::runtime_error(std::string(who) + ": non-finite score");
}

} // namespace detail

// E[log sigma(real)] + E[log(1 - sigma(fake))]. The discriminator ascends
// this; the trainer descends its negation. Optional outputs receive
// d(value)/d(logit).
template <typename T>
T adv_discriminator_loss(const nn::Tensor<T>& score_real, const nn::Tensor<T>& score_fake,
                         nn::Tensor<T>* d_real = nullptr, nn::Tensor<T>* d_fake = nullptr) {
  detail::check_finite(score_real, "adv_discriminator_loss(real)");
  detail::check_finite(score_fake, "adv_discriminator_loss(fake)");
  const T nr = static_cast<T>(score_real.size());
  const T nf = static_cast<T>(score_fake.size());
  T value(0);
  for (T v : score_real.v) value += -detail::softplus(-v) / nr; // log sigma(v)
  for (T v : score_fake.v) value += -detail::softplus(v) / nf;  // log(1 - sigma(v))
  if (d_real) {
    *d_real = nn::Tensor<T>(score_real.b, score_real.c, score_real.h, score_real.w);
    for (std::size_t i = 0; i < score_real.size(); ++i)
      d_real->v[i] = (T(1) - detail::sigmoid(score_real.v[i])) / nr;
  }
  if (d_fake) {
    *d_fake = nn::Tensor<T>(score_fake.b, score_fake.c, score_fake.h, score_fake.w);
    for (std::size_t i = 0; i < score_fake.size(); ++i)
      d_fake->v[i] = -detail::sigmoid(score_fake.v[i]) / nf;
  }
  return value;
}

// Saturating: E[log(1 - sigma(fake))], the generator descends it directly.
// Non-saturating: -E[log sigma(fake)], the standard stabilization; also
// descended. Both prefer sigma(fake) -> 1.
template <typename T>
T adv_generator_loss(const nn::Tensor<T>& score_fake, GeneratorLossMode mode,
                     nn::Tensor<T>* d_fake = nullptr) {
  detail::check_finite(score_fake, "adv_generator_loss");
  const T n = static_cast<T>(score_fake.size());
  T value(0);
  if (mode == GeneratorLossMode::Saturating) {
    for (T v : score_fake.v) value += -detail::softplus(v) / n;
  } else {
    for (T v : score_fake.v) value += detail::softplus(-v) / n;
  }
  if (d_fake) {
    *d_fake = nn::Tensor<T>(score_fake.b, score_fake.c, score_fake.h, score_fake.w);
    for (std::size_t i = 0; i < score_fake.size(); ++i) {
      const T s = detail::sigmoid(score_fake.v[i]);
      d_fake->v[i] = (mode == GeneratorLossMode::Saturating ? -s : s - T(1)) / n;
    }
  }
  return value;
}

// Mean absolute error; one directed term of the cycle loss.
template <typename T>
T cycle_loss(const nn::Tensor<T>& x, const nn::Tensor<T>& x_reconstructed,
             nn::Tensor<T>* d_reconstructed = nullptr) {
  if (!x.same_shape(x_reconstructed))
    throw std::invalid_argument("cycle_loss: shape mismatch");
  const T n = static_cast<T>(x.size());
  T value(0);
  for (std::size_t i = 0; i < x.size(); ++i)
    value += std::abs(x_reconstructed.v[i] - x.v[i]) / n;
  if (d_reconstructed) {
    *d_reconstructed = nn::Tensor<T>(x.b, x.c, x.h, x.w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const T d = x_reconstructed.v[i] - x.v[i];
      d_reconstructed->v[i] = (d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0))) / n;
    }
  }
  return value;
}

// E[log sigma(score_exp)] + E[log(1 - sigma(score_sim))]: experimental
// features are the "real" class, simulated-blurry features the "fake" class.
// D_FA ascends this; both phi encoders descend it.
template <typename T>
T feature_alignment_loss(const nn::Tensor<T>& score_exp_features,
                         const nn::Tensor<T>& score_sim_features,
                         nn::Tensor<T>* d_exp = nullptr, nn::Tensor<T>* d_sim = nullptr) {
  return adv_discriminator_loss(score_exp_features, score_sim_features, d_exp, d_sim);
}

// The phi-side feature alignment term. Saturating mode descends the minimax
// objective exactly; non-saturating swaps each term for its strong-gradient
// equivalent with the same fixed points.
template <typename T>
T fa_generator_loss(const nn::Tensor<T>& score_exp_features,
                    const nn::Tensor<T>& score_sim_features, GeneratorLossMode mode,
                    nn::Tensor<T>* d_exp = nullptr, nn::Tensor<T>* d_sim = nullptr) {
  detail::check_finite(score_exp_features, "fa_generator_loss(exp)");
  detail::check_finite(score_sim_features, "fa_generator_loss(sim)");
  const T ne = static_cast<T>(score_exp_features.size());
  const T ns = static_cast<T>(score_sim_features.size());
  T value(0);
  if (mode == GeneratorLossMode::Saturating) {
    for (T v : score_exp_features.v) value += -detail::softplus(-v) / ne;
    for (T v : score_sim_features.v) value += -detail::softplus(v) / ns;
  } else {
    for (T v : score_exp_features.v) value += detail::softplus(v) / ne;
    for (T v : score_sim_features.v) value += detail::softplus(-v) / ns;
  }
  if (d_exp) {
    *d_exp = nn::Tensor<T>(score_exp_features.b, score_exp_features.c,
                           score_exp_features.h, score_exp_features.w);
    for (std::size_t i = 0; i < score_exp_features.size(); ++i) {
      const T s = detail::sigmoid(score_exp_features.v[i]);
      d_exp->v[i] = (mode == GeneratorLossMode::Saturating ? T(1) - s : s) / ne;
    }
  }
  if (d_sim) {
    *d_sim = nn::Tensor<T>(score_sim_features.b, score_sim_features.c,
                           score_sim_features.h, score_sim_features.w);
    for (std::size_t i = 0; i < score_sim_features.size(); ++i) {
      const T s = detail::sigmoid(score_sim_features.v[i]);
      d_sim->v[i] = (mode == GeneratorLossMode::Saturating ? -s : s - T(1)) / ns;
    }
  }
  return value;
}

struct LossWeights {
  double lambda_d = 1.0;
  double lambda_b = 1.0;
  double lambda_cyc = 1.0;
  double lambda_da = 1.0;
  double lambda_fa = 0.1;
};

// Per-step named losses; the two aggregates are what the optimizer phases
// act on (discriminators ascend total_d, generators descend total_g).
struct LossReport {
  double d_d = 0, d_b = 0, d_da = 0, d_fa = 0;
  double g_d = 0, g_b = 0, g_da = 0, fa_gen = 0;
  double cyc_f = 0, cyc_b = 0;
  double total_d = 0, total_g = 0;
  std::string generator_mode = "non_saturating";
  bool finite = true;

  std::map<std::string, double> named() const {
    return {{"d_D", d_d},   {"d_B", d_b},     {"d_DA", d_da},   {"d_FA", d_fa},
            {"g_D", g_d},   {"g_B", g_b},     {"g_DA", g_da},   {"fa_gen", fa_gen},
            {"cyc_f", cyc_f}, {"cyc_b", cyc_b}, {"total_D", total_d},
            {"total_G", total_g}};
  }
};

inline void total_losses(LossReport& parts, const LossWeights& w) {
  parts.total_d = w.lambda_d * parts.d_d + w.lambda_b * parts.d_b +
                  w.lambda_da * parts.d_da + w.lambda_fa * parts.d_fa;
  parts.total_g = w.lambda_d * parts.g_d + w.lambda_b * parts.g_b +
                  w.lambda_da * parts.g_da + w.lambda_cyc * (parts.cyc_f + parts.cyc_b) +
                  w.lambda_fa * parts.fa_gen;
}

} // namespace pdanet::objectives
