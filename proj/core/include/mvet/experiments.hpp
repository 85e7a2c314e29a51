#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvet/dataset.hpp"
#include "mvet/eval.hpp"
#include "mvet/trainer.hpp"

namespace mvet {

// Shared knobs for the table commands. One master seed fans out (via
// derive_seed with a per-run tag) into every split/init/order seed, so a
// whole table is reproducible from a single number.
struct TableConfig {
  std::size_t seeds = 5;
  std::uint64_t master_seed = 1;
  SplitSpec split;
  std::size_t shared_dim = 24;
  std::size_t hidden_dim = 48;
  double slope = 0.01;
  bool bias = false;
  TrainConfig train;

  TableConfig() {
    train.lr = 5e-3;
    train.max_epochs = 100;
    train.patience = 8;
  }

  void validate() const;
};

// Singleview rows plus the four fusion variants per representation block,
// then the four fusion variants over all views. Scores are test-set micro
// F1 averaged over `seeds` runs on one shared stratified split.
struct Table1Result {
  EvalReport report;
};

Table1Result run_table1(const Dataset& ds, const TableConfig& cfg);

// SINGLE/CROSS grid: one row per view, each holding the seed-averaged
// SINGLE-j and CROSS-at-j test scores plus exact active-parameter counts.
struct Table2Row {
  std::string view;
  BucketScore single_all, single_tail, single_head;
  BucketScore cross_all, cross_tail, cross_head;
  std::size_t single_params = 0;
  std::size_t cross_params = 0;
};

struct Table2Result {
  std::vector<Table2Row> rows;
};

Table2Result run_table2(const Dataset& ds, const TableConfig& cfg);

std::string render_text(const Table2Result& table);
// view,single_all,cross_all,single_tail,cross_tail,single_head,cross_head,
// single_params,cross_params
std::string render_csv(const Table2Result& table);

}  // namespace mvet
