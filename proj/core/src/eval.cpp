#include <algorithm>
#include <cstdio>
#include <sstream>

#include "mvet/eval.hpp"

namespace mvet {

Counts& Counts::operator+=(const Counts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

Counts micro_counts(const std::vector<std::pair<Bitset, Bitset>>& pairs) {
  Counts c;
  for (const auto& [pred, gold] : pairs) {
    const std::size_t n = std::max(pred.size(), gold.size());
    for (std::size_t t = 0; t < n; ++t) {
      const bool p = t < pred.size() && pred.test(t);
      const bool g = t < gold.size() && gold.test(t);
      if (p && g) ++c.tp;
      else if (p) ++c.fp;
      else if (g) ++c.fn;
    }
  }
  return c;
}

Prf micro_f1(const Counts& c) {
  Prf out;
  const double tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) out.p = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) out.r = tp / static_cast<double>(c.tp + c.fn);
  if (out.p + out.r > 0.0) out.f1 = 2.0 * out.p * out.r / (out.p + out.r);
  return out;
}

ReportRow bucketed_eval(const std::string& label, const Dataset& ds,
                        const std::vector<std::size_t>& indices,
                        const std::function<Bitset(const EntityRecord&)>& predict) {
  ReportRow row;
  row.label = label;
  for (std::size_t idx : indices) {
    const EntityRecord& e = ds.entities[idx];
    const Bitset pred = predict(e);
    Counts c;
    const std::size_t n = std::max(pred.size(), e.types.size());
    for (std::size_t t = 0; t < n; ++t) {
      const bool p = t < pred.size() && pred.test(t);
      const bool g = t < e.types.size() && e.types.test(t);
      if (p && g) ++c.tp;
      else if (p) ++c.fp;
      else if (g) ++c.fn;
    }
    BucketScore* score = nullptr;
    switch (bucket(e.freq)) {
      case Bucket::Tail: score = &row.tail; break;
      case Bucket::Mid: score = &row.mid; break;
      case Bucket::Head: score = &row.head; break;
    }
    score->present = true;
    score->n += 1;
    score->counts += c;
  }
  row.all.present = !indices.empty();
  row.all.n = row.tail.n + row.mid.n + row.head.n;
  row.all.counts += row.tail.counts;
  row.all.counts += row.mid.counts;
  row.all.counts += row.head.counts;
  for (BucketScore* s : {&row.all, &row.tail, &row.head, &row.mid}) {
    if (s->present) s->prf = micro_f1(s->counts);
  }
  return row;
}

void subset_views(const EntityRecord& e, const std::vector<ViewId>& use_views,
                  std::vector<Vec>& views, Mask& mask) {
  views.clear();
  mask.clear();
  for (ViewId v : use_views) {
    views.push_back(e.views[v]);
    mask.push_back(e.mask[v]);
  }
}

std::function<Bitset(const EntityRecord&)> make_predictor(const ModelConfig& cfg,
                                                          const Parameters& params,
                                                          const Dataset& ds,
                                                          const std::vector<ViewId>& use_views,
                                                          double threshold, bool top1_fallback) {
  if (cfg.views.size() != use_views.size()) {
    throw SpecMismatch("model view count differs from selected dataset views");
  }
  for (std::size_t j = 0; j < use_views.size(); ++j) {
    if (use_views[j] >= ds.views.size()) throw SpecMismatch("selected view is not in the dataset");
    if (!(cfg.views[j] == ds.views[use_views[j]])) {
      throw SpecMismatch("model view spec '" + cfg.views[j].label() +
                         "' differs from dataset view '" + ds.views[use_views[j]].label() + "'");
    }
  }
  if (cfg.n_types != ds.types.size()) {
    throw SpecMismatch("model type count differs from dataset type inventory");
  }
  return [&params, use_views, threshold, top1_fallback](const EntityRecord& e) {
    std::vector<Vec> views;
    Mask mask;
    subset_views(e, use_views, views, mask);
    bool any = false;
    for (auto m : mask) any = any || m;
    if (!any) {
      // Nothing to score this entity from; predict nothing.
      return Bitset(params.head.w_o.rows());
    }
    return predict_types(model_predict(views, mask, params), threshold, top1_fallback);
  };
}

namespace {

std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * x);
  return buf;
}

constexpr const char* kAbsent = "—";

std::string score_or_marker(const BucketScore& s) { return s.present ? percent(s.prf.f1) : kAbsent; }

// Column padding by display width; the absent marker is 3 bytes, 1 column.
std::string pad_left(const std::string& s, std::size_t width) {
  std::size_t visible = s.size();
  for (std::size_t at = s.find(kAbsent); at != std::string::npos; at = s.find(kAbsent, at + 3)) {
    visible -= 2;
  }
  if (visible >= width) return s;
  return std::string(width - visible, ' ') + s;
}

}  // namespace

std::string render_text(const EvalReport& report) {
  std::size_t label_w = 5;
  for (const auto& row : report.rows) label_w = std::max(label_w, row.label.size());
  std::ostringstream out;
  out << "label" << std::string(label_w - 5, ' ');
  for (const char* col : {"all", "tail", "head", "p", "r", "n_tail", "n_head"}) {
    out << pad_left(col, 8);
  }
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.label << std::string(label_w - row.label.size(), ' ');
    out << pad_left(score_or_marker(row.all), 8);
    out << pad_left(score_or_marker(row.tail), 8);
    out << pad_left(score_or_marker(row.head), 8);
    out << pad_left(row.all.present ? percent(row.all.prf.p) : kAbsent, 8);
    out << pad_left(row.all.present ? percent(row.all.prf.r) : kAbsent, 8);
    out << pad_left(std::to_string(row.tail.n), 8);
    out << pad_left(std::to_string(row.head.n), 8);
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "label,all,tail,head,p,r,n_tail,n_head\n";
  for (const auto& row : report.rows) {
    out << row.label << ',';
    out << (row.all.present ? percent(row.all.prf.f1) : "") << ',';
    out << (row.tail.present ? percent(row.tail.prf.f1) : "") << ',';
    out << (row.head.present ? percent(row.head.prf.f1) : "") << ',';
    out << (row.all.present ? percent(row.all.prf.p) : "") << ',';
    out << (row.all.present ? percent(row.all.prf.r) : "") << ',';
    out << row.tail.n << ',' << row.head.n << '\n';
  }
  return out.str();
}

}  // namespace mvet
