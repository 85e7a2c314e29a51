#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mvet/error.hpp"
#include "mvet/numeric.hpp"

namespace mvet {

enum class FusionMode { CON, ATT, MAX, AVG };

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from(const std::string& name);  // ConfigInvalid on unknown name

// Parameters of one fusion operator over n views.
//
// CON holds a single matrix W1 of shape d x sum(view_dims); its column blocks
// follow the declared view order. ATT/MAX/AVG hold one W[j] of shape
// d x view_dims[j] per view; ATT additionally holds the gate vector a.
// Optional per-operator biases (b1 for CON, b[j] otherwise) are enabled by
// leaving them non-empty; default-constructed params have none.
//
// view_labels, when non-empty, fixes a canonical processing order (ascending
// label). All order-sensitive reductions walk views in that order, so
// permuting the declared order together with the parameter blocks and labels
// reproduces p bitwise. When empty, the declared order is used.
struct FusionParams {
  FusionMode mode = FusionMode::AVG;
  std::vector<std::size_t> view_dims;
  std::size_t fused_dim = 0;
  std::vector<std::string> view_labels;

  Mat w1;              // CON
  Vec b1;              // CON, optional
  std::vector<Mat> w;  // ATT/MAX/AVG
  std::vector<Vec> b;  // ATT/MAX/AVG, optional
  Vec gate;            // ATT

  std::size_t n_views() const { return view_dims.size(); }
  std::size_t concat_dim() const;
  bool has_bias() const;
  std::vector<std::size_t> processing_order() const;
  void validate() const;  // DimensionMismatch on any shape inconsistency
};

// Intermediates of one forward call, retained for backprop and inspection.
struct FusionTrace {
  FusionMode mode = FusionMode::AVG;
  Mask mask;                        // availability snapshot
  std::vector<Vec> projected;       // p^j; zero vector where unavailable
  Vec alphas;                       // ATT/AVG weights; exactly 0 where unavailable
  std::vector<std::size_t> winner;  // MAX: winning view per dimension
  Vec fused;                        // p
};

// Forward passes. Each requires >=1 available view (AllViewsMissing) and
// views[j] matching view_dims[j] for available j (DimensionMismatch).
FusionTrace fuse_con(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params);
FusionTrace fuse_att(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params);
FusionTrace fuse_max(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params);
FusionTrace fuse_avg(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params);

// Dispatch on params.mode.
FusionTrace fuse(const std::vector<Vec>& views, const Mask& mask, const FusionParams& params);

// Gradients mirror the parameter layout; unavailable views get zero dviews.
struct FusionGrads {
  Mat dw1;
  Vec db1;
  std::vector<Mat> dw;
  std::vector<Vec> db;
  Vec dgate;
  std::vector<Vec> dviews;
};

FusionGrads zero_fusion_grads(const FusionParams& params);

// Exact analytic backward for the matching forward call. `dfused` is dL/dp.
// Accumulates into `grads` (which must come from zero_fusion_grads or an
// earlier accumulation with the same params). TraceMismatch when the trace
// does not fit params/views/mask.
void fuse_backward(const FusionTrace& trace, const std::vector<Vec>& views, const Mask& mask,
                   const FusionParams& params, const Vec& dfused, FusionGrads& grads);

}  // namespace mvet
