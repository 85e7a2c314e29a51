#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mvet/dataset.hpp"
#include "mvet/fusion.hpp"
#include "mvet/numeric.hpp"

namespace mvet {

// Classifier head: yhat = sigmoid(W_o leaky(W_h p)). Biases optional.
struct HeadParams {
  Mat w_h;  // h x d
  Mat w_o;  // |T| x h
  Vec b_h;  // optional
  Vec b_o;  // optional
  double slope = 0.01;
};

struct ModelConfig {
  std::vector<ViewSpec> views;
  FusionMode fusion = FusionMode::ATT;
  std::size_t shared_dim = 300;  // d
  std::size_t hidden_dim = 400;  // h
  std::size_t n_types = 0;
  double slope = 0.01;
  bool bias = false;

  void validate() const;  // ConfigInvalid
  std::vector<std::string> view_labels() const;
};

struct Prediction {
  Vec scores;  // entries strictly inside (0,1)
};

struct Parameters {
  FusionParams fusion;
  HeadParams head;
};

// Named flat slice over every trainable tensor, in a fixed canonical order
// (fusion tensors in declared view order, then head). Optimizer state and
// the checkpoint format both follow this enumeration.
struct TensorRef {
  std::string name;
  double* data;
  std::size_t size;
};
std::vector<TensorRef> tensor_refs(Parameters& params);

struct ModelGrads;
// Same enumeration over a gradient pack; entry i matches tensor_refs entry i.
std::vector<TensorRef> grad_refs(ModelGrads& grads);

// Shapes from cfg; matrices Glorot-uniform, gate and biases zero. The zero
// gate makes ATT start exactly at AVG.
Parameters init_parameters(const ModelConfig& cfg, std::uint64_t seed);

// Shapes from cfg with every tensor zero; checkpoint loading target.
Parameters zero_parameters(const ModelConfig& cfg);

Prediction head_forward(const Vec& p, const HeadParams& params);

// L = -sum_t [ y ln yhat + (1-y) ln(1-yhat) ], yhat clamped to
// [1e-12, 1-1e-12]. DomainError when a score lies outside [0,1].
double bce_loss(const Vec& yhat, const Vec& y);

struct ModelGrads {
  FusionGrads fusion;
  Mat dw_h;
  Mat dw_o;
  Vec db_h;
  Vec db_o;
};
ModelGrads zero_model_grads(const Parameters& params);

Vec target_vector(const Bitset& types, std::size_t n_types);

// Loss plus exact gradients for one example, accumulated into `grads`.
// Sigmoid and BCE are fused at the logit: dL/do = yhat - y, and the loss is
// evaluated in the overflow-free softplus form.
double model_forward_backward(const std::vector<Vec>& views, const Mask& mask, const Vec& target,
                              const Parameters& params, ModelGrads& grads);
double model_forward_backward(const EntityRecord& entity, const Parameters& params,
                              ModelGrads& grads);

Prediction model_predict(const std::vector<Vec>& views, const Mask& mask,
                         const Parameters& params);

// Types scoring >= threshold; empty set falls back to the argmax type when
// top1_fallback is set.
Bitset predict_types(const Prediction& pred, double threshold, bool top1_fallback);

// Binary checkpoint: "MVETCKPT" magic, format version, config echo, then the
// tensor_refs sequence as little-endian 64-bit floats with shape prefixes.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                     const Parameters& params);
std::pair<ModelConfig, Parameters> load_checkpoint(const std::filesystem::path& path);

}  // namespace mvet
