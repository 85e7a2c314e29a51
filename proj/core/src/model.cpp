#include <cmath>
#include <numeric>

#include "mvet/model.hpp"

namespace mvet {

void ModelConfig::validate() const {
  if (views.empty()) throw ConfigInvalid("model needs >=1 view");
  if (shared_dim == 0 || hidden_dim == 0 || n_types == 0) {
    throw ConfigInvalid("model dims must be positive");
  }
  for (const auto& v : views) {
    if (v.dim == 0) throw ConfigInvalid("view dim must be positive: " + v.label());
  }
  if (!(slope > 0.0) || slope >= 1.0) throw ConfigInvalid("leaky slope must lie in (0,1)");
}

std::vector<std::string> ModelConfig::view_labels() const {
  std::vector<std::string> labels;
  labels.reserve(views.size());
  for (const auto& v : views) labels.push_back(v.label());
  return labels;
}

namespace {

FusionParams fusion_shapes(const ModelConfig& cfg) {
  FusionParams fp;
  fp.mode = cfg.fusion;
  fp.fused_dim = cfg.shared_dim;
  fp.view_labels = cfg.view_labels();
  for (const auto& v : cfg.views) fp.view_dims.push_back(v.dim);
  if (cfg.fusion == FusionMode::CON) {
    fp.w1 = Mat(cfg.shared_dim, fp.concat_dim());
    if (cfg.bias) fp.b1 = Vec(cfg.shared_dim);
    return fp;
  }
  fp.w.resize(fp.n_views());
  for (std::size_t j = 0; j < fp.n_views(); ++j) fp.w[j] = Mat(cfg.shared_dim, fp.view_dims[j]);
  if (cfg.bias) fp.b.assign(fp.n_views(), Vec(cfg.shared_dim));
  if (cfg.fusion == FusionMode::ATT) fp.gate = Vec(cfg.shared_dim);
  return fp;
}

void glorot_fill(Mat& m, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
}

}  // namespace

Parameters zero_parameters(const ModelConfig& cfg) {
  cfg.validate();
  Parameters params;
  params.fusion = fusion_shapes(cfg);
  params.head.slope = cfg.slope;
  params.head.w_h = Mat(cfg.hidden_dim, cfg.shared_dim);
  params.head.w_o = Mat(cfg.n_types, cfg.hidden_dim);
  if (cfg.bias) {
    params.head.b_h = Vec(cfg.hidden_dim);
    params.head.b_o = Vec(cfg.n_types);
  }
  return params;
}

Parameters init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, "init"));
  Parameters params;
  params.fusion = fusion_shapes(cfg);
  if (cfg.fusion == FusionMode::CON) {
    glorot_fill(params.fusion.w1, rng);
  } else {
    for (auto& wj : params.fusion.w) glorot_fill(wj, rng);
  }
  params.head.slope = cfg.slope;
  params.head.w_h = Mat(cfg.hidden_dim, cfg.shared_dim);
  params.head.w_o = Mat(cfg.n_types, cfg.hidden_dim);
  glorot_fill(params.head.w_h, rng);
  glorot_fill(params.head.w_o, rng);
  if (cfg.bias) {
    params.head.b_h = Vec(cfg.hidden_dim);
    params.head.b_o = Vec(cfg.n_types);
  }
  params.fusion.validate();
  return params;
}

std::vector<TensorRef> tensor_refs(Parameters& params) {
  std::vector<TensorRef> refs;
  const auto push_mat = [&](const std::string& name, Mat& m) {
    if (m.size()) refs.push_back({name, m.data(), m.size()});
  };
  const auto push_vec = [&](const std::string& name, Vec& v) {
    if (v.len()) refs.push_back({name, v.data(), v.len()});
  };
  FusionParams& f = params.fusion;
  push_mat("fusion.w1", f.w1);
  push_vec("fusion.b1", f.b1);
  for (std::size_t j = 0; j < f.w.size(); ++j) push_mat("fusion.w." + std::to_string(j), f.w[j]);
  for (std::size_t j = 0; j < f.b.size(); ++j) push_vec("fusion.b." + std::to_string(j), f.b[j]);
  push_vec("fusion.gate", f.gate);
  push_mat("head.w_h", params.head.w_h);
  push_vec("head.b_h", params.head.b_h);
  push_mat("head.w_o", params.head.w_o);
  push_vec("head.b_o", params.head.b_o);
  return refs;
}

std::vector<TensorRef> grad_refs(ModelGrads& grads) {
  std::vector<TensorRef> refs;
  const auto push_mat = [&](const std::string& name, Mat& m) {
    if (m.size()) refs.push_back({name, m.data(), m.size()});
  };
  const auto push_vec = [&](const std::string& name, Vec& v) {
    if (v.len()) refs.push_back({name, v.data(), v.len()});
  };
  FusionGrads& f = grads.fusion;
  push_mat("fusion.w1", f.dw1);
  push_vec("fusion.b1", f.db1);
  for (std::size_t j = 0; j < f.dw.size(); ++j) push_mat("fusion.w." + std::to_string(j), f.dw[j]);
  for (std::size_t j = 0; j < f.db.size(); ++j) push_vec("fusion.b." + std::to_string(j), f.db[j]);
  push_vec("fusion.gate", f.dgate);
  push_mat("head.w_h", grads.dw_h);
  push_vec("head.b_h", grads.db_h);
  push_mat("head.w_o", grads.dw_o);
  push_vec("head.b_o", grads.db_o);
  return refs;
}

Prediction head_forward(const Vec& p, const HeadParams& params) {
  if (p.len() != params.w_h.cols()) throw DimensionMismatch("head_forward: p has wrong length");
  Vec hidden_pre = matvec(params.w_h, p);
  if (params.b_h.len()) axpy(1.0, params.b_h, hidden_pre);
  const Vec hidden = leaky_v(hidden_pre, params.slope);
  Vec logits = matvec(params.w_o, hidden);
  if (params.b_o.len()) axpy(1.0, params.b_o, logits);
  return Prediction{sigmoid_v(logits)};
}

double bce_loss(const Vec& yhat, const Vec& y) {
  if (yhat.len() != y.len()) throw DimensionMismatch("bce_loss: length mismatch");
  double loss = 0.0;
  for (std::size_t t = 0; t < yhat.len(); ++t) {
    const double s = yhat[t];
    if (s < 0.0 || s > 1.0 || !std::isfinite(s)) {
      throw DomainError("bce_loss: score outside [0,1]");
    }
    const double c = std::min(1.0 - 1e-12, std::max(1e-12, s));
    loss -= y[t] * std::log(c) + (1.0 - y[t]) * std::log(1.0 - c);
  }
  return loss;
}

ModelGrads zero_model_grads(const Parameters& params) {
  ModelGrads g;
  g.fusion = zero_fusion_grads(params.fusion);
  g.dw_h = Mat(params.head.w_h.rows(), params.head.w_h.cols());
  g.dw_o = Mat(params.head.w_o.rows(), params.head.w_o.cols());
  if (params.head.b_h.len()) g.db_h = Vec(params.head.b_h.len());
  if (params.head.b_o.len()) g.db_o = Vec(params.head.b_o.len());
  return g;
}

Vec target_vector(const Bitset& types, std::size_t n_types) {
  Vec y(n_types);
  types.for_each_set([&](std::size_t t) { y[t] = 1.0; });
  return y;
}

double model_forward_backward(const std::vector<Vec>& views, const Mask& mask, const Vec& target,
                              const Parameters& params, ModelGrads& grads) {
  const FusionTrace trace = fuse(views, mask, params.fusion);
  const Vec& p = trace.fused;
  const HeadParams& head = params.head;
  if (target.len() != head.w_o.rows()) throw DimensionMismatch("target length != |T|");

  Vec hidden_pre = matvec(head.w_h, p);
  if (head.b_h.len()) axpy(1.0, head.b_h, hidden_pre);
  const Vec hidden = leaky_v(hidden_pre, head.slope);
  Vec logits = matvec(head.w_o, hidden);
  if (head.b_o.len()) axpy(1.0, head.b_o, logits);

  // BCE at the logit: L = max(o,0) - o*y + ln(1 + exp(-|o|)); dL/do = yhat - y.
  double loss = 0.0;
  Vec dlogits(logits.len());
  for (std::size_t t = 0; t < logits.len(); ++t) {
    const double o = logits[t];
    loss += std::max(o, 0.0) - o * target[t] + std::log1p(std::exp(-std::abs(o)));
    dlogits[t] = sigmoid(o) - target[t];
  }

  if (grads.db_o.len()) axpy(1.0, dlogits, grads.db_o);
  for (std::size_t t = 0; t < logits.len(); ++t) {
    double* row = grads.dw_o.row(t);
    for (std::size_t i = 0; i < hidden.len(); ++i) row[i] += dlogits[t] * hidden[i];
  }
  Vec dhidden = matvec_t(head.w_o, dlogits);
  Vec dhidden_pre(dhidden.len());
  for (std::size_t i = 0; i < dhidden.len(); ++i) {
    dhidden_pre[i] = dhidden[i] * leaky_prime(hidden_pre[i], head.slope);
  }
  if (grads.db_h.len()) axpy(1.0, dhidden_pre, grads.db_h);
  for (std::size_t i = 0; i < dhidden_pre.len(); ++i) {
    double* row = grads.dw_h.row(i);
    for (std::size_t k = 0; k < p.len(); ++k) row[k] += dhidden_pre[i] * p[k];
  }
  Vec dp = matvec_t(head.w_h, dhidden_pre);

  fuse_backward(trace, views, mask, params.fusion, dp, grads.fusion);
  return loss;
}

double model_forward_backward(const EntityRecord& entity, const Parameters& params,
                              ModelGrads& grads) {
  const Vec y = target_vector(entity.types, params.head.w_o.rows());
  return model_forward_backward(entity.views, entity.mask, y, params, grads);
}

Prediction model_predict(const std::vector<Vec>& views, const Mask& mask,
                         const Parameters& params) {
  const FusionTrace trace = fuse(views, mask, params.fusion);
  return head_forward(trace.fused, params.head);
}

Bitset predict_types(const Prediction& pred, double threshold, bool top1_fallback) {
  const Vec& s = pred.scores;
  Bitset out(s.len());
  std::size_t best = 0;
  for (std::size_t t = 0; t < s.len(); ++t) {
    if (s[t] >= threshold) out.set(t);
    if (s[t] > s[best]) best = t;
  }
  if (top1_fallback && s.len() && !out.any()) out.set(best);
  return out;
}

}  // namespace mvet
