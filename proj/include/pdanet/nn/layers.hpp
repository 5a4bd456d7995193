#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <omp.h>

#include "pdanet/nn/tensor.hpp"
#include "pdanet/rng.hpp"

// Layer stack with explicit backward passes. Forward activations live in an
// external per-call context (a LIFO of saved tensors), so layer objects are
// immutable during training, shareable between networks, and safe to run
// concurrently on disjoint contexts. Convolutions are im2col + Eigen GEMM,
// parallel over the batch; weight-gradient contributions are reduced in
// image order, which keeps results independent of the thread count.

namespace pdanet::nn {

template <typename T>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  avec<T> value;
  avec<T> grad;

  Parameter(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
    std::size_t total = 1;
    for (int d : shape) total *= static_cast<std::size_t>(d);
    value.assign(total, T(0));
    grad.assign(total, T(0));
  }
  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <typename T>
using ParamPtr = std::shared_ptr<Parameter<T>>;

template <typename T>
struct Ctx {
  std::vector<Tensor<T>> saved;
  void push(Tensor<T> t) { saved.push_back(std::move(t)); }
  Tensor<T> pop() {
    Tensor<T> t = std::move(saved.back());
    saved.pop_back();
    return t;
  }
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  // ctx == nullptr runs inference (nothing saved, backward impossible).
  virtual Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const = 0;
  virtual Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const = 0;
  virtual void collect_params(std::vector<ParamPtr<T>>& out) const { (void)out; }
};

namespace detail {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatCM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

// column col = output position, rows = (ci, ky, kx); zero-padded gather.
template <typename T>
void im2col(const T* src, int c_in, int h, int w, int k, int stride, int pad, int h_out,
            int w_out, T* dst) {
  const int npos = h_out * w_out;
  for (int oy = 0; oy < h_out; ++oy)
    for (int ox = 0; ox < w_out; ++ox) {
      T* col = dst + static_cast<std::size_t>(oy * w_out + ox) * (c_in * k * k);
      for (int ci = 0; ci < c_in; ++ci) {
        const T* plane = src + static_cast<std::size_t>(ci) * h * w;
        for (int ky = 0; ky < k; ++ky) {
          const int y = oy * stride + ky - pad;
          for (int kx = 0; kx < k; ++kx) {
            const int x = ox * stride + kx - pad;
            *col++ = (y >= 0 && y < h && x >= 0 && x < w) ? plane[y * w + x] : T(0);
          }
        }
      }
    }
  (void)npos;
}

// adjoint of im2col: scatter-add columns back into the image.
template <typename T>
void col2im_add(const T* cols, int c_in, int h, int w, int k, int stride, int pad,
                int h_out, int w_out, T* dst) {
  for (int oy = 0; oy < h_out; ++oy)
    for (int ox = 0; ox < w_out; ++ox) {
      const T* col = cols + static_cast<std::size_t>(oy * w_out + ox) * (c_in * k * k);
      for (int ci = 0; ci < c_in; ++ci) {
        T* plane = dst + static_cast<std::size_t>(ci) * h * w;
        for (int ky = 0; ky < k; ++ky) {
          const int y = oy * stride + ky - pad;
          for (int kx = 0; kx < k; ++kx) {
            const int x = ox * stride + kx - pad;
            if (y >= 0 && y < h && x >= 0 && x < w) plane[y * w + x] += *col;
            ++col;
          }
        }
      }
    }
}

inline int conv_out(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

} // namespace detail

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(std::string name, int c_in, int c_out, int k, int stride, int pad, Rng& init)
      : c_in_(c_in), c_out_(c_out), k_(k), stride_(stride), pad_(pad),
        weight_(std::make_shared<Parameter<T>>(name + "/weight",
                                               std::vector<int>{c_out, c_in, k, k})),
        bias_(std::make_shared<Parameter<T>>(name + "/bias", std::vector<int>{c_out})) {
    for (T& v : weight_->value) v = static_cast<T>(init.normal(0.0, 0.02));
  }

  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    if (x.c != c_in_) throw std::invalid_argument(weight_->name + ": channel mismatch");
    const int ho = detail::conv_out(x.h, k_, stride_, pad_);
    const int wo = detail::conv_out(x.w, k_, stride_, pad_);
    if (ho < 1 || wo < 1) throw std::invalid_argument(weight_->name + ": input too small");
    Tensor<T> y(x.b, c_out_, ho, wo);
    const int rows = c_in_ * k_ * k_, npos = ho * wo;
    Eigen::Map<const detail::MatRM<T>> wmat(weight_->value.data(), c_out_, rows);

#pragma omp parallel for schedule(static)
    for (int bi = 0; bi < x.b; ++bi) {
      avec<T> colbuf(static_cast<std::size_t>(rows) * npos);
      detail::im2col(x.plane_ptr(bi, 0), c_in_, x.h, x.w, k_, stride_, pad_, ho, wo,
                     colbuf.data());
      Eigen::Map<detail::MatCM<T>> cols(colbuf.data(), rows, npos);
      Eigen::Map<detail::MatRM<T>> out(y.plane_ptr(bi, 0), c_out_, npos);
      out.noalias() = wmat * cols;
      for (int co = 0; co < c_out_; ++co)
        out.row(co).array() += bias_->value[co];
    }
    if (ctx) ctx->push(x);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> x = ctx.pop();
    const int ho = dy.h, wo = dy.w, npos = ho * wo, rows = c_in_ * k_ * k_;
    Tensor<T> dx(x.b, c_in_, x.h, x.w);
    Eigen::Map<const detail::MatRM<T>> wmat(weight_->value.data(), c_out_, rows);

    std::vector<avec<T>> dw_per_image(x.b);
    std::vector<avec<T>> db_per_image(x.b);

#pragma omp parallel for schedule(static)
    for (int bi = 0; bi < x.b; ++bi) {
      avec<T> colbuf(static_cast<std::size_t>(rows) * npos);
      detail::im2col(x.plane_ptr(bi, 0), c_in_, x.h, x.w, k_, stride_, pad_, ho, wo,
                     colbuf.data());
      Eigen::Map<detail::MatCM<T>> cols(colbuf.data(), rows, npos);
      Eigen::Map<const detail::MatRM<T>> dyi(dy.plane_ptr(bi, 0), c_out_, npos);

      dw_per_image[bi].assign(weight_->size(), T(0));
      Eigen::Map<detail::MatRM<T>> dwi(dw_per_image[bi].data(), c_out_, rows);
      dwi.noalias() = dyi * cols.transpose();

      db_per_image[bi].assign(static_cast<std::size_t>(c_out_), T(0));
      const T* dplane = dy.plane_ptr(bi, 0);
      for (int co = 0; co < c_out_; ++co) {
        T acc(0);
        for (int i = 0; i < npos; ++i) acc += dplane[co * npos + i];
        db_per_image[bi][co] = acc;
      }

      avec<T> dcol(static_cast<std::size_t>(rows) * npos);
      Eigen::Map<detail::MatCM<T>> dcols(dcol.data(), rows, npos);
      dcols.noalias() = wmat.transpose() * dyi;
      detail::col2im_add(dcol.data(), c_in_, x.h, x.w, k_, stride_, pad_, ho, wo,
                         dx.plane_ptr(bi, 0));
    }
    // image-order reduction keeps gradients thread-count independent
    for (int bi = 0; bi < x.b; ++bi) {
      for (std::size_t i = 0; i < weight_->size(); ++i)
        weight_->grad[i] += dw_per_image[bi][i];
      for (int co = 0; co < c_out_; ++co) bias_->grad[co] += db_per_image[bi][co];
    }
    return dx;
  }

  void collect_params(std::vector<ParamPtr<T>>& out) const override {
    out.push_back(weight_);
    out.push_back(bias_);
  }

 private:
  int c_in_, c_out_, k_, stride_, pad_;
  ParamPtr<T> weight_, bias_;
};

// Transposed convolution; the spatial adjoint of Conv2d(k, stride, pad) plus
// output_padding on the far edges. Weight layout (c_in, c_out, k, k).
template <typename T>
class ConvTranspose2d final : public Layer<T> {
 public:
  ConvTranspose2d(std::string name, int c_in, int c_out, int k, int stride, int pad,
                  int output_pad, Rng& init)
      : c_in_(c_in), c_out_(c_out), k_(k), stride_(stride), pad_(pad), opad_(output_pad),
        weight_(std::make_shared<Parameter<T>>(name + "/weight",
                                               std::vector<int>{c_in, c_out, k, k})),
        bias_(std::make_shared<Parameter<T>>(name + "/bias", std::vector<int>{c_out})) {
    for (T& v : weight_->value) v = static_cast<T>(init.normal(0.0, 0.02));
  }

  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    if (x.c != c_in_) throw std::invalid_argument(weight_->name + ": channel mismatch");
    const int ho = (x.h - 1) * stride_ - 2 * pad_ + k_ + opad_;
    const int wo = (x.w - 1) * stride_ - 2 * pad_ + k_ + opad_;
    // the adjoint conv from (ho, wo) back to (x.h, x.w) must be consistent
    if (detail::conv_out(ho, k_, stride_, pad_) != x.h ||
        detail::conv_out(wo, k_, stride_, pad_) != x.w)
      throw std::invalid_argument(weight_->name + ": inconsistent transposed geometry");

    Tensor<T> y(x.b, c_out_, ho, wo);
    const int rows = c_out_ * k_ * k_, npos = x.h * x.w;
    Eigen::Map<const detail::MatRM<T>> wmat(weight_->value.data(), c_in_, rows);

#pragma omp parallel for schedule(static)
    for (int bi = 0; bi < x.b; ++bi) {
      Eigen::Map<const detail::MatRM<T>> xi(x.plane_ptr(bi, 0), c_in_, npos);
      avec<T> colbuf(static_cast<std::size_t>(rows) * npos);
      Eigen::Map<detail::MatCM<T>> cols(colbuf.data(), rows, npos);
      cols.noalias() = wmat.transpose() * xi;
      detail::col2im_add(colbuf.data(), c_out_, ho, wo, k_, stride_, pad_, x.h, x.w,
                         y.plane_ptr(bi, 0));
      T* plane = y.plane_ptr(bi, 0);
      for (int co = 0; co < c_out_; ++co)
        for (int i = 0; i < ho * wo; ++i) plane[co * ho * wo + i] += bias_->value[co];
    }
    if (ctx) ctx->push(x);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> x = ctx.pop();
    const int rows = c_out_ * k_ * k_, npos = x.h * x.w;
    Tensor<T> dx(x.b, c_in_, x.h, x.w);
    Eigen::Map<const detail::MatRM<T>> wmat(weight_->value.data(), c_in_, rows);

    std::vector<avec<T>> dw_per_image(x.b);
    std::vector<avec<T>> db_per_image(x.b);

#pragma omp parallel for schedule(static)
    for (int bi = 0; bi < x.b; ++bi) {
      avec<T> colbuf(static_cast<std::size_t>(rows) * npos);
      detail::im2col(dy.plane_ptr(bi, 0), c_out_, dy.h, dy.w, k_, stride_, pad_, x.h, x.w,
                     colbuf.data());
      Eigen::Map<detail::MatCM<T>> cols(colbuf.data(), rows, npos);
      Eigen::Map<const detail::MatRM<T>> xi(x.plane_ptr(bi, 0), c_in_, npos);
      Eigen::Map<detail::MatRM<T>> dxi(dx.plane_ptr(bi, 0), c_in_, npos);
      dxi.noalias() = wmat * cols;

      dw_per_image[bi].assign(weight_->size(), T(0));
      Eigen::Map<detail::MatRM<T>> dwi(dw_per_image[bi].data(), c_in_, rows);
      dwi.noalias() = xi * cols.transpose();

      db_per_image[bi].assign(static_cast<std::size_t>(c_out_), T(0));
      const T* dplane = dy.plane_ptr(bi, 0);
      for (int co = 0; co < c_out_; ++co) {
        T acc(0);
        for (int i = 0; i < dy.h * dy.w; ++i) acc += dplane[co * dy.h * dy.w + i];
        db_per_image[bi][co] = acc;
      }
    }
    for (int bi = 0; bi < x.b; ++bi) {
      for (std::size_t i = 0; i < weight_->size(); ++i)
        weight_->grad[i] += dw_per_image[bi][i];
      for (int co = 0; co < c_out_; ++co) bias_->grad[co] += db_per_image[bi][co];
    }
    return dx;
  }

  void collect_params(std::vector<ParamPtr<T>>& out) const override {
    out.push_back(weight_);
    out.push_back(bias_);
  }

 private:
  int c_in_, c_out_, k_, stride_, pad_, opad_;
  ParamPtr<T> weight_, bias_;
};

// Per-sample, per-channel normalization without affine parameters.
template <typename T>
class InstanceNorm final : public Layer<T> {
 public:
  explicit InstanceNorm(T eps = T(1e-5)) : eps_(eps) {}

  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    Tensor<T> y(x.b, x.c, x.h, x.w);
    Tensor<T> inv_std(x.b, x.c, 1, 1);
    const int n = x.plane();
#pragma omp parallel for schedule(static) collapse(2)
    for (int bi = 0; bi < x.b; ++bi)
      for (int ci = 0; ci < x.c; ++ci) {
        const T* src = x.plane_ptr(bi, ci);
        T* dst = y.plane_ptr(bi, ci);
        T mean(0);
        for (int i = 0; i < n; ++i) mean += src[i];
        mean /= static_cast<T>(n);
        T var(0);
        for (int i = 0; i < n; ++i) var += (src[i] - mean) * (src[i] - mean);
        var /= static_cast<T>(n);
        const T is = T(1) / std::sqrt(var + eps_);
        inv_std.at(bi, ci, 0, 0) = is;
        for (int i = 0; i < n; ++i) dst[i] = (src[i] - mean) * is;
      }
    if (ctx) {
      ctx->push(y);
      ctx->push(std::move(inv_std));
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> inv_std = ctx.pop();
    Tensor<T> y = ctx.pop();
    Tensor<T> dx(dy.b, dy.c, dy.h, dy.w);
    const int n = dy.plane();
#pragma omp parallel for schedule(static) collapse(2)
    for (int bi = 0; bi < dy.b; ++bi)
      for (int ci = 0; ci < dy.c; ++ci) {
        const T* g = dy.plane_ptr(bi, ci);
        const T* yn = y.plane_ptr(bi, ci);
        T* out = dx.plane_ptr(bi, ci);
        T mean_g(0), mean_gy(0);
        for (int i = 0; i < n; ++i) {
          mean_g += g[i];
          mean_gy += g[i] * yn[i];
        }
        mean_g /= static_cast<T>(n);
        mean_gy /= static_cast<T>(n);
        const T is = inv_std.at(bi, ci, 0, 0);
        for (int i = 0; i < n; ++i) out[i] = is * (g[i] - mean_g - yn[i] * mean_gy);
      }
    return dx;
  }

 private:
  T eps_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    Tensor<T> y = x;
    for (T& v : y.v) v = v > T(0) ? v : T(0);
    if (ctx) ctx->push(y);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> y = ctx.pop();
    Tensor<T> dx = dy;
    for (std::size_t i = 0; i < dx.v.size(); ++i)
      if (y.v[i] <= T(0)) dx.v[i] = T(0);
    return dx;
  }
};

template <typename T>
class LeakyReLU final : public Layer<T> {
 public:
  explicit LeakyReLU(T slope) : slope_(slope) {}
  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    Tensor<T> y = x;
    for (T& v : y.v) v = v > T(0) ? v : slope_ * v;
    if (ctx) ctx->push(x);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> x = ctx.pop();
    Tensor<T> dx = dy;
    for (std::size_t i = 0; i < dx.v.size(); ++i)
      if (x.v[i] <= T(0)) dx.v[i] *= slope_;
    return dx;
  }

 private:
  T slope_;
};

template <typename T>
class Tanh final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    Tensor<T> y = x;
    for (T& v : y.v) v = std::tanh(v);
    if (ctx) ctx->push(y);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> y = ctx.pop();
    Tensor<T> dx = dy;
    for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= T(1) - y.v[i] * y.v[i];
    return dx;
  }
};

template <typename T>
class ReflectionPad final : public Layer<T> {
 public:
  explicit ReflectionPad(int pad) : pad_(pad) {}

  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    if (x.h <= pad_ || x.w <= pad_)
      throw std::invalid_argument("ReflectionPad: input smaller than padding");
    Tensor<T> y(x.b, x.c, x.h + 2 * pad_, x.w + 2 * pad_);
    for (int bi = 0; bi < x.b; ++bi)
      for (int ci = 0; ci < x.c; ++ci) {
        const T* src = x.plane_ptr(bi, ci);
        T* dst = y.plane_ptr(bi, ci);
        for (int r = 0; r < y.h; ++r) {
          const int sr = reflect(r - pad_, x.h);
          for (int c = 0; c < y.w; ++c) dst[r * y.w + c] = src[sr * x.w + reflect(c - pad_, x.w)];
        }
      }
    if (ctx) {
      Tensor<T> shape_token; // records the source shape only; no payload
      shape_token.b = x.b;
      shape_token.c = x.c;
      shape_token.h = x.h;
      shape_token.w = x.w;
      ctx->push(std::move(shape_token));
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> token = ctx.pop();
    Tensor<T> dx(token.b, token.c, token.h, token.w);
    for (int bi = 0; bi < dy.b; ++bi)
      for (int ci = 0; ci < dy.c; ++ci) {
        const T* g = dy.plane_ptr(bi, ci);
        T* out = dx.plane_ptr(bi, ci);
        for (int r = 0; r < dy.h; ++r) {
          const int sr = reflect(r - pad_, dx.h);
          for (int c = 0; c < dy.w; ++c) out[sr * dx.w + reflect(c - pad_, dx.w)] += g[r * dy.w + c];
        }
      }
    return dx;
  }

 private:
  static int reflect(int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
  }
  int pad_;
};

template <typename T>
class Sequential final : public Layer<T> {
 public:
  Sequential() = default;

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    Tensor<T> cur = x;
    for (const auto& l : layers_) cur = l->forward(cur, ctx);
    return cur;
  }

  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> cur = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      cur = (*it)->backward(cur, ctx);
    return cur;
  }

  void collect_params(std::vector<ParamPtr<T>>& out) const override {
    for (const auto& l : layers_) l->collect_params(out);
  }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// y = x + body(x)
template <typename T>
class ResidualBlock final : public Layer<T> {
 public:
  explicit ResidualBlock(std::unique_ptr<Sequential<T>> body) : body_(std::move(body)) {}

  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const override {
    Tensor<T> y = body_->forward(x, ctx);
    y += x;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, Ctx<T>& ctx) const override {
    Tensor<T> dx = body_->backward(dy, ctx);
    dx += dy;
    return dx;
  }

  void collect_params(std::vector<ParamPtr<T>>& out) const override {
    body_->collect_params(out);
  }

 private:
  std::unique_ptr<Sequential<T>> body_;
};

} // namespace pdanet::nn
