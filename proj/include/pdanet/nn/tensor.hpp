#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "pdanet/nn/aligned.hpp"

namespace pdanet::nn {

// Dense B x C x H x W tensor, row-major innermost W. The whole network stack
// is templated on the scalar so training runs in float while gradient checks
// instantiate the identical code in double.
template <typename T>
struct Tensor {
  int b = 0, c = 0, h = 0, w = 0;
  avec<T> v;

  Tensor() = default;
  Tensor(int b_, int c_, int h_, int w_)
      : b(b_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(b_) * c_ * h_ * w_, T(0)) {}

  std::size_t size() const { return v.size(); }
  int plane() const { return h * w; }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  T& at(int bi, int ci, int y, int x) {
    return v[((static_cast<std::size_t>(bi) * c + ci) * h + y) * w + x];
  }
  T at(int bi, int ci, int y, int x) const {
    return v[((static_cast<std::size_t>(bi) * c + ci) * h + y) * w + x];
  }

  T* plane_ptr(int bi, int ci) { return v.data() + (static_cast<std::size_t>(bi) * c + ci) * plane(); }
  const T* plane_ptr(int bi, int ci) const {
    return v.data() + (static_cast<std::size_t>(bi) * c + ci) * plane();
  }

  bool same_shape(const Tensor& o) const {
    return b == o.b && c == o.c && h == o.h && w == o.w;
  }

  void fill(T value) { std::fill(v.begin(), v.end(), value); }

  Tensor& operator+=(const Tensor& o) {
    assert(same_shape(o));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
};

} // namespace pdanet::nn
