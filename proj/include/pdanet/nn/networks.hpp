#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdanet/nn/layers.hpp"

// The three generators share one architecture: a Down stage (7x7 conv then
// two stride-2 3x3 convs), nine residual blocks at the bottleneck, and an Up
// stage (two stride-2 transposed 3x3 convs, final 7x7 conv, tanh). The
// feature stage phi = Down + ResNet is always private per generator; the Up
// stage can be bound to a shared parameter set so two generators decode
// through literally the same weights.

namespace pdanet::nn {

template <typename T>
using SharedUpHandle = std::shared_ptr<Sequential<T>>;

template <typename T>
struct GeneratorCtx {
  Ctx<T> feature;
  Ctx<T> up;
};

template <typename T>
struct GeneratorOut {
  Tensor<T> features; // phi(x), B x 4C x H/4 x W/4
  Tensor<T> output;   // up(phi(x)), same shape as x, in [-1, 1]
};

template <typename T>
class GeneratorNet {
 public:
  GeneratorNet(std::unique_ptr<Sequential<T>> feature_stage, SharedUpHandle<T> up_stage)
      : feature_stage_(std::move(feature_stage)), up_stage_(std::move(up_stage)) {}

  GeneratorOut<T> forward(const Tensor<T>& x, GeneratorCtx<T>* ctx) const {
    GeneratorOut<T> out;
    out.features = feature_stage_->forward(x, ctx ? &ctx->feature : nullptr);
    out.output = up_stage_->forward(out.features, ctx ? &ctx->up : nullptr);
    return out;
  }

  // d_output flows back through the Up stage; d_features (optional) is added
  // at the phi junction before the feature stage runs backward.
  Tensor<T> backward(const Tensor<T>& d_output, const Tensor<T>* d_features,
                     GeneratorCtx<T>& ctx) const {
    Tensor<T> d_phi = up_stage_->backward(d_output, ctx.up);
    if (d_features) d_phi += *d_features;
    return feature_stage_->backward(d_phi, ctx.feature);
  }

  // Backward for a gradient entering only at the feature junction (no output
  // gradient); used when only the feature-alignment term touches this pass.
  Tensor<T> backward_features_only(const Tensor<T>& d_features, GeneratorCtx<T>& ctx) const {
    ctx.up.saved.clear(); // the Up ctx of this pass is unused
    return feature_stage_->backward(d_features, ctx.feature);
  }

  std::vector<ParamPtr<T>> params() const {
    std::vector<ParamPtr<T>> out = feature_params();
    up_stage_->collect_params(out);
    return out;
  }
  std::vector<ParamPtr<T>> feature_params() const {
    std::vector<ParamPtr<T>> out;
    feature_stage_->collect_params(out);
    return out;
  }
  std::vector<ParamPtr<T>> up_params() const {
    std::vector<ParamPtr<T>> out;
    up_stage_->collect_params(out);
    return out;
  }
  const SharedUpHandle<T>& up_handle() const { return up_stage_; }

 private:
  std::unique_ptr<Sequential<T>> feature_stage_;
  SharedUpHandle<T> up_stage_;
};

template <typename T>
SharedUpHandle<T> build_up_stage(const std::string& name, int channels_base,
                                 std::uint64_t seed) {
  Rng init(seed);
  auto up = std::make_shared<Sequential<T>>();
  const int c = channels_base;
  up->add(std::make_unique<ConvTranspose2d<T>>(name + "/up1", 4 * c, 2 * c, 3, 2, 1, 1, init));
  up->add(std::make_unique<InstanceNorm<T>>());
  up->add(std::make_unique<ReLU<T>>());
  up->add(std::make_unique<ConvTranspose2d<T>>(name + "/up2", 2 * c, c, 3, 2, 1, 1, init));
  up->add(std::make_unique<InstanceNorm<T>>());
  up->add(std::make_unique<ReLU<T>>());
  up->add(std::make_unique<ReflectionPad<T>>(3));
  up->add(std::make_unique<Conv2d<T>>(name + "/out", c, 1, 7, 1, 0, init));
  up->add(std::make_unique<Tanh<T>>());
  return up;
}

// shared_up == nullptr builds a private Up stage named after this generator.
template <typename T>
GeneratorNet<T> build_generator(const std::string& name, int channels_base,
                                SharedUpHandle<T> shared_up, std::uint64_t seed) {
  if (channels_base < 8)
    throw std::invalid_argument("build_generator: channels_base must be >= 8");
  Rng init(seed);
  const int c = channels_base;
  auto feat = std::make_unique<Sequential<T>>();
  feat->add(std::make_unique<ReflectionPad<T>>(3));
  feat->add(std::make_unique<Conv2d<T>>(name + "/down1", 1, c, 7, 1, 0, init));
  feat->add(std::make_unique<InstanceNorm<T>>());
  feat->add(std::make_unique<ReLU<T>>());
  feat->add(std::make_unique<Conv2d<T>>(name + "/down2", c, 2 * c, 3, 2, 1, init));
  feat->add(std::make_unique<InstanceNorm<T>>());
  feat->add(std::make_unique<ReLU<T>>());
  feat->add(std::make_unique<Conv2d<T>>(name + "/down3", 2 * c, 4 * c, 3, 2, 1, init));
  feat->add(std::make_unique<InstanceNorm<T>>());
  feat->add(std::make_unique<ReLU<T>>());
  for (int i = 0; i < 9; ++i) {
    auto body = std::make_unique<Sequential<T>>();
    const std::string rb = name + "/res" + std::to_string(i);
    body->add(std::make_unique<ReflectionPad<T>>(1));
    body->add(std::make_unique<Conv2d<T>>(rb + "/conv1", 4 * c, 4 * c, 3, 1, 0, init));
    body->add(std::make_unique<InstanceNorm<T>>());
    body->add(std::make_unique<ReLU<T>>());
    body->add(std::make_unique<ReflectionPad<T>>(1));
    body->add(std::make_unique<Conv2d<T>>(rb + "/conv2", 4 * c, 4 * c, 3, 1, 0, init));
    body->add(std::make_unique<InstanceNorm<T>>());
    feat->add(std::make_unique<ResidualBlock<T>>(std::move(body)));
  }

  SharedUpHandle<T> up = shared_up
                             ? std::move(shared_up)
                             : build_up_stage<T>(name, channels_base,
                                                 derive_seed(seed, /*stream=*/17));
  return GeneratorNet<T>(std::move(feat), std::move(up));
}

// 70x70 PatchGAN: four stride-2-ish 4x4 convolutions to a 1-channel score
// map of pre-sigmoid logits. No normalization after the first layer.
template <typename T>
class DiscriminatorNet {
 public:
  DiscriminatorNet(std::unique_ptr<Sequential<T>> net) : net_(std::move(net)) {}

  Tensor<T> forward(const Tensor<T>& x, Ctx<T>* ctx) const { return net_->forward(x, ctx); }
  Tensor<T> backward(const Tensor<T>& d_score, Ctx<T>& ctx) const {
    return net_->backward(d_score, ctx);
  }
  std::vector<ParamPtr<T>> params() const {
    std::vector<ParamPtr<T>> out;
    net_->collect_params(out);
    return out;
  }

 private:
  std::unique_ptr<Sequential<T>> net_;
};

template <typename T>
DiscriminatorNet<T> build_patchgan(const std::string& name, int channels_base,
                                   std::uint64_t seed) {
  Rng init(seed);
  const int c = channels_base;
  auto net = std::make_unique<Sequential<T>>();
  net->add(std::make_unique<Conv2d<T>>(name + "/c1", 1, c, 4, 2, 1, init));
  net->add(std::make_unique<LeakyReLU<T>>(T(0.2)));
  net->add(std::make_unique<Conv2d<T>>(name + "/c2", c, 2 * c, 4, 2, 1, init));
  net->add(std::make_unique<InstanceNorm<T>>());
  net->add(std::make_unique<LeakyReLU<T>>(T(0.2)));
  net->add(std::make_unique<Conv2d<T>>(name + "/c3", 2 * c, 4 * c, 4, 2, 1, init));
  net->add(std::make_unique<InstanceNorm<T>>());
  net->add(std::make_unique<LeakyReLU<T>>(T(0.2)));
  net->add(std::make_unique<Conv2d<T>>(name + "/c4", 4 * c, 8 * c, 4, 1, 1, init));
  net->add(std::make_unique<InstanceNorm<T>>());
  net->add(std::make_unique<LeakyReLU<T>>(T(0.2)));
  net->add(std::make_unique<Conv2d<T>>(name + "/score", 8 * c, 1, 4, 1, 1, init));
  return DiscriminatorNet<T>(std::move(net));
}

// Domain classifier over phi feature maps: three 3x3 stride-1 convolutions
// ending in a 1-channel score map.
template <typename T>
DiscriminatorNet<T> build_feature_classifier(const std::string& name, int feature_channels,
                                             std::uint64_t seed) {
  Rng init(seed);
  const int c = feature_channels;
  auto net = std::make_unique<Sequential<T>>();
  net->add(std::make_unique<Conv2d<T>>(name + "/c1", c, c / 2, 3, 1, 1, init));
  net->add(std::make_unique<LeakyReLU<T>>(T(0.2)));
  net->add(std::make_unique<Conv2d<T>>(name + "/c2", c / 2, c / 4, 3, 1, 1, init));
  net->add(std::make_unique<LeakyReLU<T>>(T(0.2)));
  net->add(std::make_unique<Conv2d<T>>(name + "/score", c / 4, 1, 3, 1, 1, init));
  return DiscriminatorNet<T>(std::move(net));
}

} // namespace pdanet::nn
