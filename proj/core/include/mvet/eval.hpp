#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mvet/dataset.hpp"
#include "mvet/model.hpp"

namespace mvet {

// tp/fp/fn pooled over (entity, type) decisions.
struct Counts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  Counts& operator+=(const Counts& o);
  bool operator==(const Counts&) const = default;
};

// One (predicted, gold) pair per entity.
Counts micro_counts(const std::vector<std::pair<Bitset, Bitset>>& pairs);

struct Prf {
  double p = 0.0;
  double r = 0.0;
  double f1 = 0.0;
};

// p=tp/(tp+fp), r=tp/(tp+fn), f1=2pr/(p+r); each 0 when its denominator is 0.
Prf micro_f1(const Counts& c);

// Scores over one frequency bucket; absent buckets render as a marker, not 0.
struct BucketScore {
  bool present = false;
  std::size_t n = 0;  // entities in the bucket
  Counts counts;
  Prf prf;
};

struct ReportRow {
  std::string label;
  BucketScore all;
  BucketScore tail;
  BucketScore head;
  BucketScore mid;  // internal; "all" additivity check, not rendered
};

struct EvalReport {
  std::vector<ReportRow> rows;
};

// Predicted/gold micro scores over ds.entities[indices], split by bucket(freq).
ReportRow bucketed_eval(const std::string& label, const Dataset& ds,
                        const std::vector<std::size_t>& indices,
                        const std::function<Bitset(const EntityRecord&)>& predict);

// Restrict an entity to a view subset, in subset order.
void subset_views(const EntityRecord& e, const std::vector<ViewId>& use_views,
                  std::vector<Vec>& views, Mask& mask);

// Entity predictor for a trained model over `use_views` of the dataset.
// SpecMismatch when the model's view specs disagree with the dataset's.
std::function<Bitset(const EntityRecord&)> make_predictor(const ModelConfig& cfg,
                                                          const Parameters& params,
                                                          const Dataset& ds,
                                                          const std::vector<ViewId>& use_views,
                                                          double threshold, bool top1_fallback);

// Scores are rendered as percentages with two decimals; absent buckets show
// an em dash in text and an empty field in CSV.
std::string render_text(const EvalReport& report);
std::string render_csv(const EvalReport& report);  // label,all,tail,head,p,r,n_tail,n_head

}  // namespace mvet
