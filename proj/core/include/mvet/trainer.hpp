#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvet/dataset.hpp"
#include "mvet/eval.hpp"
#include "mvet/model.hpp"

namespace mvet {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  bool deterministic = true;
  double threshold = 0.5;
  bool top1_fallback = true;

  void validate() const;  // ConfigInvalid
};

// First/second moment per tensor, following the tensor_refs enumeration.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

AdamState make_adam_state(Parameters& params);

// Standard bias-corrected Adam over the whole parameter pack.
// ShapeMismatch when grads or state disagree with params.
void adam_step(Parameters& params, ModelGrads& grads, AdamState& state, const TrainConfig& cfg);

struct EpochStat {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean per-example train loss
  double dev_f1 = 0.0;
};

struct TrainResult {
  ModelConfig config;
  Parameters params;  // best dev epoch, not the last
  std::vector<EpochStat> history;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
};

// epoch,loss,dev_f1
void write_history_csv(const std::vector<EpochStat>& history, std::ostream& out);
void write_history_csv(const std::vector<EpochStat>& history, const std::filesystem::path& path);

// Minibatch training on split.train with per-epoch dev micro F1, keeping the
// best-dev parameters and stopping after `patience` epochs without
// improvement. `use_views` selects the dataset views the model consumes;
// cfg_template supplies fusion mode, d, h, slope, bias (views and |T| are
// filled from the dataset). EmptySplit when train or dev is empty.
TrainResult train_multiview(const Dataset& ds, const Split& split,
                            const std::vector<ViewId>& use_views, ModelConfig cfg_template,
                            const TrainConfig& tc);

// One training example per (entity, available view).
struct CrossExample {
  std::size_t entity;  // index into ds.entities
  ViewId view;
};

std::vector<CrossExample> build_cross_set(const Dataset& ds);
std::vector<CrossExample> build_cross_set(const Dataset& ds,
                                          const std::vector<std::size_t>& indices);

// Per-view projections W^j with a shared head, trained on the union of the
// per-view example streams; each example fuses exactly one view (AVG over a
// singleton). Dev metric is micro F1 pooled over the dev cross-examples.
TrainResult train_cross(const Dataset& ds, const Split& split, ModelConfig cfg_template,
                        const TrainConfig& tc);

// The same architecture restricted to one view, trained only on the entities
// where that view is available. ViewUnknown / NoExamples.
TrainResult train_single(const Dataset& ds, const Split& split, const std::string& view_label,
                         ModelConfig cfg_template, const TrainConfig& tc);

// Parameters active when predicting from one view: that view's projection
// plus the shared head (biases included when present). The SINGLE-j and
// CROSS-at-j figures match exactly.
std::size_t active_param_count(const Parameters& params, ViewId view);

}  // namespace mvet
