#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <unordered_set>
#include <vector>

#include "pdanet/nn/layers.hpp"

namespace pdanet::nn {

// Adam over a parameter list. Parameters appearing more than once (the
// shared Up stage shows up through both of its generators) are deduplicated
// by identity, so a shared tensor takes exactly one step on the sum of its
// gradient contributions.
template <typename T>
class Adam {
 public:
  Adam(std::vector<ParamPtr<T>> params, double lr, double beta1 = 0.5,
       double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    std::unordered_set<const Parameter<T>*> seen;
    for (auto& p : params) {
      if (seen.insert(p.get()).second) params_.push_back(p);
    }
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i]->size(), T(0));
      v_[i].assign(params_[i]->size(), T(0));
    }
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    const T bc1 = static_cast<T>(1.0 - std::pow(beta1_, t_));
    const T bc2 = static_cast<T>(1.0 - std::pow(beta2_, t_));
    const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
    const T lr = static_cast<T>(lr_), eps = static_cast<T>(eps_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        const T g = p.grad[j];
        m_[i][j] = b1 * m_[i][j] + (T(1) - b1) * g;
        v_[i][j] = b2 * v_[i][j] + (T(1) - b2) * g * g;
        const T mhat = m_[i][j] / bc1;
        const T vhat = v_[i][j] / bc2;
        p.value[j] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  const std::vector<ParamPtr<T>>& params() const { return params_; }
  std::int64_t step_count() const { return t_; }

  // checkpoint access
  const std::vector<avec<T>>& first_moments() const { return m_; }
  const std::vector<avec<T>>& second_moments() const { return v_; }
  std::vector<avec<T>>& first_moments() { return m_; }
  std::vector<avec<T>>& second_moments() { return v_; }
  void set_step_count(std::int64_t t) { t_ = t; }

 private:
  std::vector<ParamPtr<T>> params_;
  std::vector<avec<T>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

} // namespace pdanet::nn
