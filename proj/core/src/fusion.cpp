#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvet/fusion.hpp"

namespace mvet {

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::CON: return "con";
    case FusionMode::ATT: return "att";
    case FusionMode::MAX: return "max";
    case FusionMode::AVG: return "avg";
  }
  return "?";
}

FusionMode fusion_mode_from(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "con") return FusionMode::CON;
  if (s == "att") return FusionMode::ATT;
  if (s == "max") return FusionMode::MAX;
  if (s == "avg") return FusionMode::AVG;
  throw ConfigInvalid("unknown fusion mode '" + name + "'");
}

std::size_t FusionParams::concat_dim() const {
  return std::accumulate(view_dims.begin(), view_dims.end(), std::size_t{0});
}

bool FusionParams::has_bias() const {
  return mode == FusionMode::CON ? b1.len() > 0 : !b.empty();
}

std::vector<std::size_t> FusionParams::processing_order() const {
  std::vector<std::size_t> order(n_views());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (view_labels.size() == n_views()) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return view_labels[a] < view_labels[b];
    });
  }
  return order;
}

void FusionParams::validate() const {
  if (n_views() == 0 || fused_dim == 0) {
    throw DimensionMismatch("fusion params need >=1 view and fused_dim > 0");
  }
  if (!view_labels.empty() && view_labels.size() != n_views()) {
    throw DimensionMismatch("view_labels size does not match view count");
  }
  if (mode == FusionMode::CON) {
    if (w1.rows() != fused_dim || w1.cols() != concat_dim()) {
      throw DimensionMismatch("CON W1 shape mismatch");
    }
    if (b1.len() != 0 && b1.len() != fused_dim) throw DimensionMismatch("CON bias length mismatch");
    return;
  }
  if (w.size() != n_views()) throw DimensionMismatch("per-view matrix count mismatch");
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j].rows() != fused_dim || w[j].cols() != view_dims[j]) {
      throw DimensionMismatch("W^j shape mismatch at view " + std::to_string(j));
    }
  }
  if (!b.empty()) {
    if (b.size() != n_views()) throw DimensionMismatch("per-view bias count mismatch");
    for (const auto& bj : b) {
      if (bj.len() != fused_dim) throw DimensionMismatch("b^j length mismatch");
    }
  }
  if (mode == FusionMode::ATT && gate.len() != fused_dim) {
    throw DimensionMismatch("ATT gate length mismatch");
  }
}

namespace {

void check_inputs(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params) {
  params.validate();
  if (views.size() != params.n_views() || mask.size() != params.n_views()) {
    throw DimensionMismatch("view/mask count does not match params");
  }
  bool any = false;
  for (std::size_t j = 0; j < views.size(); ++j) {
    if (!mask[j]) continue;
    any = true;
    if (views[j].len() != params.view_dims[j]) {
      throw DimensionMismatch("view " + std::to_string(j) + " has wrong dimension");
    }
  }
  if (!any) throw AllViewsMissing("no available view to fuse");
}

// p^j = tanh(W^j v^j [+ b^j]) for available views; zero vectors elsewhere.
std::vector<Vec> project_views(const std::vector<Vec>& views, const Mask& mask,
                               const FusionParams& params) {
  std::vector<Vec> projected(views.size());
  for (std::size_t j = 0; j < views.size(); ++j) {
    if (!mask[j]) {
      projected[j] = Vec(params.fused_dim);
      continue;
    }
    Vec u = matvec(params.w[j], views[j]);
    if (!params.b.empty()) axpy(1.0, params.b[j], u);
    projected[j] = tanh_v(u);
  }
  return projected;
}

}  // namespace

FusionTrace fuse_con(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params) {
  check_inputs(views, mask, params);
  const std::size_t d = params.fused_dim;
  FusionTrace trace;
  trace.mode = FusionMode::CON;
  trace.mask = mask;

  // Per-view block partial dots, reduced in canonical order: keeps the result
  // bitwise stable under consistent permutation of views and W1 blocks.
  std::vector<std::size_t> offset(views.size() + 1, 0);
  for (std::size_t j = 0; j < views.size(); ++j) offset[j + 1] = offset[j] + params.view_dims[j];

  Vec z = params.b1.len() ? params.b1 : Vec(d);
  for (std::size_t j : params.processing_order()) {
    if (!mask[j]) continue;
    const Vec& v = views[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double* row = params.w1.row(i) + offset[j];
      double s = 0.0;
      for (std::size_t k = 0; k < v.len(); ++k) s += row[k] * v[k];
      z[i] += s;
    }
  }
  trace.fused = tanh_v(z);
  return trace;
}

FusionTrace fuse_att(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params) {
  check_inputs(views, mask, params);
  FusionTrace trace;
  trace.mode = FusionMode::ATT;
  trace.mask = mask;
  trace.projected = project_views(views, mask, params);

  Vec logits(views.size());
  for (std::size_t j = 0; j < views.size(); ++j) {
    logits[j] = mask[j] ? dot(params.gate, trace.projected[j]) : 0.0;
  }
  trace.alphas = softmax(logits, mask, params.processing_order());

  Vec p(params.fused_dim);
  for (std::size_t j : params.processing_order()) {
    if (mask[j]) axpy(trace.alphas[j], trace.projected[j], p);
  }
  trace.fused = std::move(p);
  return trace;
}

FusionTrace fuse_max(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params) {
  check_inputs(views, mask, params);
  FusionTrace trace;
  trace.mode = FusionMode::MAX;
  trace.mask = mask;
  trace.projected = project_views(views, mask, params);

  const std::size_t d = params.fused_dim;
  Vec p(d);
  trace.winner.assign(d, std::size_t(-1));
  for (std::size_t j : params.processing_order()) {
    if (!mask[j]) continue;
    for (std::size_t i = 0; i < d; ++i) {
      if (trace.winner[i] == std::size_t(-1) || trace.projected[j][i] > p[i]) {
        p[i] = trace.projected[j][i];
        trace.winner[i] = j;
      }
    }
  }
  trace.fused = std::move(p);
  return trace;
}

FusionTrace fuse_avg(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params) {
  check_inputs(views, mask, params);
  FusionTrace trace;
  trace.mode = FusionMode::AVG;
  trace.mask = mask;
  trace.projected = project_views(views, mask, params);

  std::size_t available = 0;
  for (auto m : mask) available += m ? 1 : 0;
  const double alpha = 1.0 / static_cast<double>(available);

  trace.alphas = Vec(views.size());
  Vec p(params.fused_dim);
  for (std::size_t j : params.processing_order()) {
    if (!mask[j]) continue;
    trace.alphas[j] = alpha;
    axpy(alpha, trace.projected[j], p);
  }
  trace.fused = std::move(p);
  return trace;
}

FusionTrace fuse(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params) {
  switch (params.mode) {
    case FusionMode::CON: return fuse_con(views, mask, params);
    case FusionMode::ATT: return fuse_att(views, mask, params);
    case FusionMode::MAX: return fuse_max(views, mask, params);
    case FusionMode::AVG: return fuse_avg(views, mask, params);
  }
  throw ConfigInvalid("bad fusion mode");
}

FusionGrads zero_fusion_grads(const FusionParams& params) {
  FusionGrads g;
  g.dviews.resize(params.n_views());
  for (std::size_t j = 0; j < params.n_views(); ++j) g.dviews[j] = Vec(params.view_dims[j]);
  if (params.mode == FusionMode::CON) {
    g.dw1 = Mat(params.fused_dim, params.concat_dim());
    if (params.b1.len()) g.db1 = Vec(params.fused_dim);
    return g;
  }
  g.dw.resize(params.n_views());
  for (std::size_t j = 0; j < params.n_views(); ++j) {
    g.dw[j] = Mat(params.fused_dim, params.view_dims[j]);
  }
  if (!params.b.empty()) {
    g.db.assign(params.n_views(), Vec(params.fused_dim));
  }
  if (params.mode == FusionMode::ATT) g.dgate = Vec(params.fused_dim);
  return g;
}

namespace {

void check_trace(const FusionTrace& trace, const std::vector<Vec>& views, const Mask& mask,
                 const FusionParams& params, const Vec& dfused) {
  if (trace.mode != params.mode) throw TraceMismatch("trace mode differs from params mode");
  if (trace.mask != mask) throw TraceMismatch("trace mask differs from call mask");
  if (views.size() != params.n_views() || mask.size() != params.n_views()) {
    throw TraceMismatch("view/mask count does not match params");
  }
  if (trace.fused.len() != params.fused_dim || dfused.len() != params.fused_dim) {
    throw TraceMismatch("fused/upstream dimension mismatch");
  }
  if (params.mode != FusionMode::CON && trace.projected.size() != params.n_views()) {
    throw TraceMismatch("trace lacks projected views");
  }
  if (params.mode == FusionMode::MAX && trace.winner.size() != params.fused_dim) {
    throw TraceMismatch("trace lacks winner indices");
  }
  if ((params.mode == FusionMode::ATT || params.mode == FusionMode::AVG) &&
      trace.alphas.len() != params.n_views()) {
    throw TraceMismatch("trace lacks attention weights");
  }
}

// Shared tail for ATT/MAX/AVG: route dp^j through tanh, W^j, b^j, v^j.
void backward_through_projection(std::size_t j, const FusionTrace& trace,
                                 const std::vector<Vec>& views, const FusionParams& params,
                                 const Vec& dprojected, FusionGrads& grads) {
  const Vec& pj = trace.projected[j];
  Vec du(params.fused_dim);
  for (std::size_t i = 0; i < params.fused_dim; ++i) {
    du[i] = dprojected[i] * tanh_prime_from_y(pj[i]);
  }
  for (std::size_t i = 0; i < params.fused_dim; ++i) {
    double* drow = grads.dw[j].row(i);
    for (std::size_t k = 0; k < views[j].len(); ++k) drow[k] += du[i] * views[j][k];
  }
  if (!grads.db.empty()) axpy(1.0, du, grads.db[j]);
  Vec dv = matvec_t(params.w[j], du);
  axpy(1.0, dv, grads.dviews[j]);
}

}  // namespace

void fuse_backward(const FusionTrace& trace, const std::vector<Vec>& views, const Mask& mask,
                   const FusionParams& params, const Vec& dfused, FusionGrads& grads) {
  check_trace(trace, views, mask, params, dfused);
  const std::size_t d = params.fused_dim;
  const auto order = params.processing_order();

  if (params.mode == FusionMode::CON) {
    Vec dz(d);
    for (std::size_t i = 0; i < d; ++i) dz[i] = dfused[i] * tanh_prime_from_y(trace.fused[i]);
    if (grads.db1.len()) axpy(1.0, dz, grads.db1);
    std::vector<std::size_t> offset(views.size() + 1, 0);
    for (std::size_t j = 0; j < views.size(); ++j) offset[j + 1] = offset[j] + params.view_dims[j];
    for (std::size_t j = 0; j < views.size(); ++j) {
      if (!mask[j]) continue;
      const Vec& v = views[j];
      Vec& dv = grads.dviews[j];
      for (std::size_t i = 0; i < d; ++i) {
        const double* row = params.w1.row(i) + offset[j];
        double* drow = grads.dw1.row(i) + offset[j];
        for (std::size_t k = 0; k < v.len(); ++k) {
          drow[k] += dz[i] * v[k];
          dv[k] += dz[i] * row[k];
        }
      }
    }
    return;
  }

  if (params.mode == FusionMode::ATT) {
    // dL/dalpha_j = dp . p^j; softmax Jacobian: dl_j = alpha_j (g_j - sum_k alpha_k g_k).
    Vec galpha(views.size());
    double mixed = 0.0;
    for (std::size_t j : order) {
      if (!mask[j]) continue;
      galpha[j] = dot(dfused, trace.projected[j]);
      mixed += trace.alphas[j] * galpha[j];
    }
    for (std::size_t j = 0; j < views.size(); ++j) {
      if (!mask[j]) continue;
      const double dlogit = trace.alphas[j] * (galpha[j] - mixed);
      Vec dproj(d);
      for (std::size_t i = 0; i < d; ++i) {
        dproj[i] = trace.alphas[j] * dfused[i] + dlogit * params.gate[i];
      }
      axpy(dlogit, trace.projected[j], grads.dgate);
      backward_through_projection(j, trace, views, params, dproj, grads);
    }
    return;
  }

  if (params.mode == FusionMode::MAX) {
    for (std::size_t j = 0; j < views.size(); ++j) {
      if (!mask[j]) continue;
      Vec dproj(d);
      bool touched = false;
      for (std::size_t i = 0; i < d; ++i) {
        if (trace.winner[i] == j) {
          dproj[i] = dfused[i];
          touched = true;
        }
      }
      if (touched) backward_through_projection(j, trace, views, params, dproj, grads);
    }
    return;
  }

  // AVG
  for (std::size_t j = 0; j < views.size(); ++j) {
    if (!mask[j]) continue;
    Vec dproj(d);
    for (std::size_t i = 0; i < d; ++i) dproj[i] = trace.alphas[j] * dfused[i];
    backward_through_projection(j, trace, views, params, dproj, grads);
  }
}

}  // namespace mvet
