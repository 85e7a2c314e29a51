#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "mvet/experiments.hpp"

namespace mvet {

void TableConfig::validate() const {
  if (seeds == 0) throw ConfigInvalid("seeds must be >= 1");
  if (shared_dim == 0 || hidden_dim == 0) throw ConfigInvalid("model dims must be positive");
  split.validate();
  train.validate();
}

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

// Seed-averaged bucket score. Presence and sizes are split-determined and
// therefore identical across seeds; only the scores are averaged.
struct MeanScore {
  BucketScore first;
  double p = 0.0, r = 0.0, f1 = 0.0;
  std::size_t runs = 0;

  void add(const BucketScore& s) {
    if (runs == 0) first = s;
    p += s.prf.p;
    r += s.prf.r;
    f1 += s.prf.f1;
    ++runs;
  }

  BucketScore mean() const {
    BucketScore out = first;
    if (runs && out.present) {
      out.prf.p = p / static_cast<double>(runs);
      out.prf.r = r / static_cast<double>(runs);
      out.prf.f1 = f1 / static_cast<double>(runs);
    }
    return out;
  }
};

struct MeanRow {
  MeanScore all, tail, head, mid;

  void add(const ReportRow& row) {
    all.add(row.all);
    tail.add(row.tail);
    head.add(row.head);
    mid.add(row.mid);
  }

  ReportRow mean(const std::string& label) const {
    ReportRow out;
    out.label = label;
    out.all = all.mean();
    out.tail = tail.mean();
    out.head = head.mean();
    out.mid = mid.mean();
    return out;
  }
};

ModelConfig model_template(const TableConfig& cfg, FusionMode mode) {
  ModelConfig mc;
  mc.fusion = mode;
  mc.shared_dim = cfg.shared_dim;
  mc.hidden_dim = cfg.hidden_dim;
  mc.slope = cfg.slope;
  mc.bias = cfg.bias;
  return mc;
}

// One Table-1 row: train on `use` with `mode`, evaluate on all test
// entities (entities lacking every selected view predict nothing), average
// over seeds.
ReportRow table1_row(const Dataset& ds, const Split& split, const std::vector<ViewId>& use,
                     FusionMode mode, const std::string& label, const TableConfig& cfg) {
  MeanRow acc;
  for (std::size_t k = 0; k < cfg.seeds; ++k) {
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.master_seed, "table1:" + label + ":" + std::to_string(k));
    const TrainResult res = train_multiview(ds, split, use, model_template(cfg, mode), tc);
    const auto predict = [&](const EntityRecord& e) {
      std::vector<Vec> views;
      Mask mask;
      subset_views(e, use, views, mask);
      bool any = false;
      for (auto m : mask) any = any || m;
      if (!any) return Bitset(res.config.n_types);
      return predict_types(model_predict(views, mask, res.params), tc.threshold,
                           tc.top1_fallback);
    };
    acc.add(bucketed_eval(label, ds, split.test, predict));
  }
  return acc.mean(label);
}

const std::vector<FusionMode> kModes = {FusionMode::CON, FusionMode::ATT, FusionMode::MAX,
                                        FusionMode::AVG};

}  // namespace

Table1Result run_table1(const Dataset& ds, const TableConfig& cfg) {
  cfg.validate();
  const Split split = stratified_split(ds, cfg.split, derive_seed(cfg.master_seed, "split"));

  Table1Result out;
  std::size_t repr_blocks = 0;
  for (Representation repr : {Representation::Ctxt, Representation::Name, Representation::Desc}) {
    std::vector<ViewId> block;
    for (ViewId j = 0; j < ds.views.size(); ++j) {
      if (ds.views[j].repr == repr) block.push_back(j);
    }
    if (block.empty()) continue;
    ++repr_blocks;
    const std::string prefix = upper(std::string(to_string(repr)));
    for (ViewId j : block) {
      const std::string label = prefix + " " + upper(ds.views[j].language);
      out.report.rows.push_back(
          table1_row(ds, split, {j}, FusionMode::AVG, label, cfg));
    }
    for (FusionMode mode : kModes) {
      const std::string label = prefix + " " + upper(to_string(mode));
      out.report.rows.push_back(table1_row(ds, split, block, mode, label, cfg));
    }
  }
  if (repr_blocks > 1) {
    std::vector<ViewId> all(ds.views.size());
    for (ViewId j = 0; j < all.size(); ++j) all[j] = j;
    for (FusionMode mode : kModes) {
      const std::string label = "MULTI " + upper(to_string(mode));
      out.report.rows.push_back(table1_row(ds, split, all, mode, label, cfg));
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> available_subset(const Dataset& ds, const std::vector<std::size_t>& idx,
                                          ViewId view) {
  std::vector<std::size_t> out;
  for (std::size_t i : idx) {
    if (ds.entities[i].mask[view]) out.push_back(i);
  }
  return out;
}

}  // namespace

Table2Result run_table2(const Dataset& ds, const TableConfig& cfg) {
  cfg.validate();
  const Split split = stratified_split(ds, cfg.split, derive_seed(cfg.master_seed, "split"));

  Table2Result out;
  out.rows.resize(ds.views.size());
  std::vector<std::vector<std::size_t>> test_at(ds.views.size());
  for (ViewId j = 0; j < ds.views.size(); ++j) {
    out.rows[j].view = ds.views[j].label();
    test_at[j] = available_subset(ds, split.test, j);
  }

  for (ViewId j = 0; j < ds.views.size(); ++j) {
    MeanRow acc;
    for (std::size_t k = 0; k < cfg.seeds; ++k) {
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.master_seed,
                            "table2:single:" + out.rows[j].view + ":" + std::to_string(k));
      const TrainResult res =
          train_single(ds, split, out.rows[j].view, model_template(cfg, FusionMode::AVG), tc);
      const auto predict = [&](const EntityRecord& e) {
        const std::vector<Vec> views{e.views[j]};
        const Mask one{1};
        return predict_types(model_predict(views, one, res.params), tc.threshold,
                             tc.top1_fallback);
      };
      acc.add(bucketed_eval(out.rows[j].view, ds, test_at[j], predict));
      out.rows[j].single_params = active_param_count(res.params, 0);
    }
    const ReportRow row = acc.mean(out.rows[j].view);
    out.rows[j].single_all = row.all;
    out.rows[j].single_tail = row.tail;
    out.rows[j].single_head = row.head;
  }

  std::vector<MeanRow> cross_acc(ds.views.size());
  for (std::size_t k = 0; k < cfg.seeds; ++k) {
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.master_seed, "table2:cross:" + std::to_string(k));
    const TrainResult res = train_cross(ds, split, model_template(cfg, FusionMode::AVG), tc);
    for (ViewId j = 0; j < ds.views.size(); ++j) {
      const auto predict = [&](const EntityRecord& e) {
        Mask mask(e.mask.size(), 0);
        mask[j] = 1;
        return predict_types(model_predict(e.views, mask, res.params), tc.threshold,
                             tc.top1_fallback);
      };
      cross_acc[j].add(bucketed_eval(out.rows[j].view, ds, test_at[j], predict));
      out.rows[j].cross_params = active_param_count(res.params, j);
    }
  }
  for (ViewId j = 0; j < ds.views.size(); ++j) {
    const ReportRow row = cross_acc[j].mean(out.rows[j].view);
    out.rows[j].cross_all = row.all;
    out.rows[j].cross_tail = row.tail;
    out.rows[j].cross_head = row.head;
  }
  return out;
}

namespace {

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * x);
  return buf;
}

std::string cell(const BucketScore& s) { return s.present ? pct(s.prf.f1) : "—"; }

std::string pad(const std::string& s, std::size_t width) {
  std::size_t visible = s.size();
  if (s.find("—") != std::string::npos) visible -= 2;
  if (visible >= width) return s;
  return std::string(width - visible, ' ') + s;
}

}  // namespace

std::string render_text(const Table2Result& table) {
  std::size_t label_w = 4;
  for (const auto& row : table.rows) label_w = std::max(label_w, row.view.size());
  std::ostringstream out;
  out << "view" << std::string(label_w - 4, ' ');
  for (const char* col : {"SINGLE-all", "CROSS-all", "SINGLE-tail", "CROSS-tail", "SINGLE-head",
                          "CROSS-head", "S-params", "C-params"}) {
    out << pad(col, 13);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.view << std::string(label_w - row.view.size(), ' ');
    out << pad(cell(row.single_all), 13) << pad(cell(row.cross_all), 13);
    out << pad(cell(row.single_tail), 13) << pad(cell(row.cross_tail), 13);
    out << pad(cell(row.single_head), 13) << pad(cell(row.cross_head), 13);
    out << pad(std::to_string(row.single_params), 13) << pad(std::to_string(row.cross_params), 13);
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const Table2Result& table) {
  std::ostringstream out;
  out << "view,single_all,cross_all,single_tail,cross_tail,single_head,cross_head,"
         "single_params,cross_params\n";
  for (const auto& row : table.rows) {
    const auto field = [](const BucketScore& s) { return s.present ? pct(s.prf.f1) : ""; };
    out << row.view << ',' << field(row.single_all) << ',' << field(row.cross_all) << ','
        << field(row.single_tail) << ',' << field(row.cross_tail) << ','
        << field(row.single_head) << ',' << field(row.cross_head) << ','
        << row.single_params << ',' << row.cross_params << '\n';
  }
  return out.str();
}

}  // namespace mvet
