#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>
#include <thread>

#include "mvet/trainer.hpp"

namespace mvet {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigInvalid("lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigInvalid("moment decays must lie in [0,1)");
  }
  if (!(eps > 0.0)) throw ConfigInvalid("eps must be positive");
  if (batch_size == 0) throw ConfigInvalid("batch size must be >= 1");
  if (max_epochs == 0) throw ConfigInvalid("max epochs must be >= 1");
  if (patience == 0) throw ConfigInvalid("patience must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigInvalid("threshold must lie in (0,1)");
}

AdamState make_adam_state(Parameters& params) {
  AdamState state;
  for (const auto& ref : tensor_refs(params)) {
    state.m.emplace_back(ref.size, 0.0);
    state.v.emplace_back(ref.size, 0.0);
  }
  return state;
}

void adam_step(Parameters& params, ModelGrads& grads, AdamState& state, const TrainConfig& cfg) {
  auto prefs = tensor_refs(params);
  auto grefs = grad_refs(grads);
  if (prefs.size() != grefs.size() || prefs.size() != state.m.size()) {
    throw ShapeMismatch("adam_step: tensor enumeration mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < prefs.size(); ++k) {
    if (prefs[k].size != grefs[k].size || prefs[k].size != state.m[k].size() ||
        prefs[k].name != grefs[k].name) {
      throw ShapeMismatch("adam_step: tensor '" + prefs[k].name + "' shape mismatch");
    }
    double* w = prefs[k].data;
    const double* g = grefs[k].data;
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    for (std::size_t i = 0; i < prefs[k].size; ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void write_history_csv(const std::vector<EpochStat>& history, std::ostream& out) {
  out << "epoch,loss,dev_f1\n";
  for (const auto& s : history) {
    out << s.epoch << ',' << format_g9(s.loss) << ',' << format_g9(s.dev_f1) << '\n';
  }
}

void write_history_csv(const std::vector<EpochStat>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open history file: " + path.string());
  write_history_csv(history, out);
}

namespace {

// One training example; storage lives in ExampleStore.
struct ExampleRef {
  const std::vector<Vec>* views;
  const Mask* mask;
  const Vec* target;
};

struct ExampleStore {
  std::vector<std::vector<Vec>> views;
  std::vector<Mask> masks;
  std::vector<Vec> targets;
  std::vector<ExampleRef> refs;
};

bool is_identity_selection(const std::vector<ViewId>& use_views, std::size_t n_views) {
  if (use_views.size() != n_views) return false;
  for (std::size_t j = 0; j < n_views; ++j) {
    if (use_views[j] != j) return false;
  }
  return true;
}

void check_views(const Dataset& ds, const std::vector<ViewId>& use_views) {
  if (use_views.empty()) throw ViewUnknown("no view selected");
  for (ViewId v : use_views) {
    if (v >= ds.views.size()) throw ViewUnknown("view id out of range");
  }
}

void add_grads(ModelGrads& dst, ModelGrads& src) {
  auto d = grad_refs(dst);
  auto s = grad_refs(src);
  for (std::size_t k = 0; k < d.size(); ++k) {
    for (std::size_t i = 0; i < d[k].size; ++i) d[k].data[i] += s[k].data[i];
  }
}

// Fixed chunk size: chunk-local accumulation plus in-order reduction makes
// the fast path bit-identical to the deterministic one.
constexpr std::size_t kChunk = 32;

double batch_grads(const std::vector<ExampleRef>& examples, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end, const Parameters& params, bool deterministic,
                   ModelGrads& grads) {
  const std::size_t n_chunks = (end - begin + kChunk - 1) / kChunk;
  const auto run_chunk = [&](std::size_t c) {
    ModelGrads local = zero_model_grads(params);
    double loss = 0.0;
    const std::size_t lo = begin + c * kChunk;
    const std::size_t hi = std::min(end, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      const ExampleRef& ex = examples[order[i]];
      loss += model_forward_backward(*ex.views, *ex.mask, *ex.target, params, local);
    }
    return std::make_pair(std::move(local), loss);
  };

  double loss = 0.0;
  if (deterministic || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      auto [local, l] = run_chunk(c);
      add_grads(grads, local);
      loss += l;
    }
    return loss;
  }
  std::vector<std::future<std::pair<ModelGrads, double>>> futures;
  futures.reserve(n_chunks);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    futures.push_back(std::async(std::launch::async, run_chunk, c));
  }
  for (auto& f : futures) {
    auto [local, l] = f.get();
    add_grads(grads, local);
    loss += l;
  }
  return loss;
}

TrainResult run_training(const ModelConfig& cfg, const TrainConfig& tc,
                         const std::vector<ExampleRef>& train,
                         const std::function<double(const Parameters&)>& dev_f1) {
  TrainResult result;
  result.config = cfg;
  Parameters params = init_parameters(cfg, tc.seed);
  AdamState adam = make_adam_state(params);
  Rng order_rng(derive_seed(tc.seed, "order"));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  result.best_dev_f1 = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t at = 0; at < order.size(); at += tc.batch_size) {
      const std::size_t end = std::min(order.size(), at + tc.batch_size);
      ModelGrads grads = zero_model_grads(params);
      epoch_loss += batch_grads(train, order, at, end, params, tc.deterministic, grads);
      adam_step(params, grads, adam, tc);
    }
    const double f1 = dev_f1(params);
    result.history.push_back(
        {epoch, epoch_loss / static_cast<double>(train.size()), f1});
    if (f1 > result.best_dev_f1) {
      result.best_dev_f1 = f1;
      result.best_epoch = epoch;
      result.params = params;
      stale = 0;
    } else if (++stale >= tc.patience) {
      break;
    }
  }
  return result;
}

}  // namespace

TrainResult train_multiview(const Dataset& ds, const Split& split,
                            const std::vector<ViewId>& use_views, ModelConfig cfg_template,
                            const TrainConfig& tc) {
  tc.validate();
  check_views(ds, use_views);
  if (split.train.empty() || split.dev.empty()) throw EmptySplit("train/dev split required");

  ModelConfig cfg = std::move(cfg_template);
  cfg.views.clear();
  for (ViewId v : use_views) cfg.views.push_back(ds.views[v]);
  cfg.n_types = ds.types.size();
  cfg.validate();

  const bool identity = is_identity_selection(use_views, ds.views.size());
  ExampleStore store;
  store.targets.reserve(split.train.size());
  if (!identity) {
    store.views.reserve(split.train.size());
    store.masks.reserve(split.train.size());
  }
  for (std::size_t idx : split.train) {
    const EntityRecord& e = ds.entities[idx];
    const std::vector<Vec>* views = &e.views;
    const Mask* mask = &e.mask;
    if (!identity) {
      std::vector<Vec> sub_views;
      Mask sub_mask;
      subset_views(e, use_views, sub_views, sub_mask);
      store.views.push_back(std::move(sub_views));
      store.masks.push_back(std::move(sub_mask));
      views = &store.views.back();
      mask = &store.masks.back();
    }
    bool any = false;
    for (auto m : *mask) any = any || m;
    if (!any) continue;  // nothing to learn from under this view selection
    store.targets.push_back(target_vector(e.types, cfg.n_types));
    store.refs.push_back({views, mask, &store.targets.back()});
  }
  if (store.refs.empty()) throw EmptySplit("no train entity has a selected view available");

  auto dev_f1 = [&](const Parameters& params) {
    Counts c;
    std::vector<Vec> views;
    Mask mask;
    for (std::size_t idx : split.dev) {
      const EntityRecord& e = ds.entities[idx];
      subset_views(e, use_views, views, mask);
      bool any = false;
      for (auto m : mask) any = any || m;
      Bitset pred(cfg.n_types);
      if (any) {
        pred = predict_types(model_predict(views, mask, params), tc.threshold, tc.top1_fallback);
      }
      for (std::size_t t = 0; t < cfg.n_types; ++t) {
        const bool p = pred.test(t);
        const bool g = e.types.test(t);
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
      }
    }
    return micro_f1(c).f1;
  };

  return run_training(cfg, tc, store.refs, dev_f1);
}

std::vector<CrossExample> build_cross_set(const Dataset& ds) {
  std::vector<std::size_t> all(ds.entities.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return build_cross_set(ds, all);
}

std::vector<CrossExample> build_cross_set(const Dataset& ds,
                                          const std::vector<std::size_t>& indices) {
  std::vector<CrossExample> out;
  for (std::size_t idx : indices) {
    const EntityRecord& e = ds.entities[idx];
    for (ViewId j = 0; j < e.mask.size(); ++j) {
      if (e.mask[j]) out.push_back({idx, j});
    }
  }
  return out;
}

namespace {

// Cross examples reuse the entity's view storage; only the singleton mask
// and the per-entity target are materialized.
ExampleStore cross_store(const Dataset& ds, const std::vector<CrossExample>& examples,
                         std::size_t n_types) {
  ExampleStore store;
  store.masks.reserve(examples.size());
  std::vector<std::ptrdiff_t> target_at(ds.entities.size(), -1);
  store.targets.reserve(ds.entities.size());
  for (const auto& ex : examples) {
    const EntityRecord& e = ds.entities[ex.entity];
    Mask mask(e.mask.size(), 0);
    mask[ex.view] = 1;
    store.masks.push_back(std::move(mask));
    if (target_at[ex.entity] < 0) {
      target_at[ex.entity] = static_cast<std::ptrdiff_t>(store.targets.size());
      store.targets.push_back(target_vector(e.types, n_types));
    }
    store.refs.push_back({&e.views, &store.masks.back(),
                          &store.targets[static_cast<std::size_t>(target_at[ex.entity])]});
  }
  return store;
}

double cross_pool_f1(const Dataset& ds, const std::vector<CrossExample>& examples,
                     const Parameters& params, const TrainConfig& tc, std::size_t n_types) {
  Counts c;
  for (const auto& ex : examples) {
    const EntityRecord& e = ds.entities[ex.entity];
    Mask mask(e.mask.size(), 0);
    mask[ex.view] = 1;
    const Bitset pred =
        predict_types(model_predict(e.views, mask, params), tc.threshold, tc.top1_fallback);
    for (std::size_t t = 0; t < n_types; ++t) {
      const bool p = pred.test(t);
      const bool g = e.types.test(t);
      if (p && g) ++c.tp;
      else if (p) ++c.fp;
      else if (g) ++c.fn;
    }
  }
  return micro_f1(c).f1;
}

ModelConfig shared_space_config(const Dataset& ds, ModelConfig cfg_template) {
  ModelConfig cfg = std::move(cfg_template);
  cfg.views = ds.views;
  cfg.fusion = FusionMode::AVG;  // singleton masks reduce it to p = tanh(W^j v^j)
  cfg.n_types = ds.types.size();
  cfg.validate();
  return cfg;
}

}  // namespace

TrainResult train_cross(const Dataset& ds, const Split& split, ModelConfig cfg_template,
                        const TrainConfig& tc) {
  tc.validate();
  if (split.train.empty() || split.dev.empty()) throw EmptySplit("train/dev split required");
  const ModelConfig cfg = shared_space_config(ds, std::move(cfg_template));

  const auto train_examples = build_cross_set(ds, split.train);
  const auto dev_examples = build_cross_set(ds, split.dev);
  if (train_examples.empty() || dev_examples.empty()) {
    throw EmptySplit("cross example stream is empty");
  }
  const ExampleStore store = cross_store(ds, train_examples, cfg.n_types);
  auto dev_f1 = [&](const Parameters& params) {
    return cross_pool_f1(ds, dev_examples, params, tc, cfg.n_types);
  };
  return run_training(cfg, tc, store.refs, dev_f1);
}

TrainResult train_single(const Dataset& ds, const Split& split, const std::string& view_label,
                         ModelConfig cfg_template, const TrainConfig& tc) {
  tc.validate();
  const auto view = ds.view_id(view_label);
  if (!view) throw ViewUnknown("view '" + view_label + "' is not declared in the dataset");
  if (split.train.empty() || split.dev.empty()) throw EmptySplit("train/dev split required");

  ModelConfig cfg = std::move(cfg_template);
  cfg.views = {ds.views[*view]};
  cfg.fusion = FusionMode::AVG;
  cfg.n_types = ds.types.size();
  cfg.validate();

  ExampleStore store;
  store.views.reserve(split.train.size());
  store.targets.reserve(split.train.size());
  static const Mask kOne{1};
  for (std::size_t idx : split.train) {
    const EntityRecord& e = ds.entities[idx];
    if (!e.mask[*view]) continue;
    store.views.push_back({e.views[*view]});
    store.targets.push_back(target_vector(e.types, cfg.n_types));
    store.refs.push_back({&store.views.back(), &kOne, &store.targets.back()});
  }
  if (store.refs.empty()) throw NoExamples("view '" + view_label + "' has no training example");

  auto dev_f1 = [&, view](const Parameters& params) {
    Counts c;
    for (std::size_t idx : split.dev) {
      const EntityRecord& e = ds.entities[idx];
      if (!e.mask[*view]) continue;
      const std::vector<Vec> views{e.views[*view]};
      const Bitset pred =
          predict_types(model_predict(views, kOne, params), tc.threshold, tc.top1_fallback);
      for (std::size_t t = 0; t < cfg.n_types; ++t) {
        const bool p = pred.test(t);
        const bool g = e.types.test(t);
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
      }
    }
    return micro_f1(c).f1;
  };

  return run_training(cfg, tc, store.refs, dev_f1);
}

std::size_t active_param_count(const Parameters& params, ViewId view) {
  const FusionParams& f = params.fusion;
  if (view >= f.n_views()) throw ViewUnknown("view id out of range");
  std::size_t n = 0;
  if (f.mode == FusionMode::CON) {
    n += f.fused_dim * f.view_dims[view];
    n += f.b1.len();
  } else {
    n += f.w[view].size();
    if (!f.b.empty()) n += f.b[view].len();
  }
  n += params.head.w_h.size() + params.head.b_h.len();
  n += params.head.w_o.size() + params.head.b_o.len();
  return n;
}

}  // namespace mvet
