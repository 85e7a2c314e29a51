#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "mvet/generator.hpp"
#include "mvet/trainer.hpp"

using namespace mvet;

namespace {

ModelConfig tiny_model(FusionMode mode = FusionMode::ATT) {
  ModelConfig cfg;
  cfg.fusion = mode;
  cfg.shared_dim = 8;
  cfg.hidden_dim = 12;
  return cfg;
}

TrainConfig fast_train(std::size_t epochs, std::uint64_t seed = 1) {
  TrainConfig tc;
  tc.lr = 5e-3;
  tc.batch_size = 32;
  tc.max_epochs = epochs;
  tc.patience = epochs;
  tc.seed = seed;
  return tc;
}

std::vector<ViewId> all_views(const Dataset& ds) {
  std::vector<ViewId> ids(ds.views.size());
  for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = j;
  return ids;
}

bool params_equal(const Parameters& a, const Parameters& b) {
  Parameters pa = a;
  Parameters pb = b;
  const auto ra = tensor_refs(pa);
  const auto rb = tensor_refs(pb);
  if (ra.size() != rb.size()) return false;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    if (ra[k].size != rb[k].size) return false;
    for (std::size_t i = 0; i < ra[k].size; ++i) {
      if (ra[k].data[i] != rb[k].data[i]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig tc;
  CHECK_NOTHROW(tc.validate());
  tc.lr = 0.0;
  CHECK_THROWS_AS(tc.validate(), ConfigInvalid);
  tc = TrainConfig{};
  tc.beta1 = 1.0;
  CHECK_THROWS_AS(tc.validate(), ConfigInvalid);
  tc = TrainConfig{};
  tc.batch_size = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigInvalid);
  tc = TrainConfig{};
  tc.max_epochs = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigInvalid);
}

TEST_CASE("adam first step moves a unit weight to ~0.999") {
  ModelConfig cfg;
  cfg.views = {{"en", Representation::Ctxt, 1}};
  cfg.fusion = FusionMode::AVG;
  cfg.shared_dim = 1;
  cfg.hidden_dim = 1;
  cfg.n_types = 1;
  Parameters params = zero_parameters(cfg);
  const auto refs = tensor_refs(params);
  for (const auto& r : refs) {
    for (std::size_t i = 0; i < r.size; ++i) r.data[i] = 1.0;
  }

  ModelGrads grads = zero_model_grads(params);
  const auto grefs = grad_refs(grads);
  for (const auto& r : grefs) {
    for (std::size_t i = 0; i < r.size; ++i) r.data[i] = 0.5;
  }

  AdamState state = make_adam_state(params);
  TrainConfig tc;
  adam_step(params, grads, state, tc);

  // bias correction makes the first update lr * g/(|g| + eps') regardless of g
  const double expected = 1.0 - 1e-3 * 0.5 / (std::sqrt(0.25) + 1e-8);
  for (const auto& r : tensor_refs(params)) {
    for (std::size_t i = 0; i < r.size; ++i) {
      CHECK(r.data[i] == doctest::Approx(expected).epsilon(1e-12));
      CHECK(std::abs(r.data[i] - 0.999) < 1e-6);
    }
  }
  CHECK(state.t == 1);
}

TEST_CASE("adam leaves parameters fixed under zero gradients") {
  ModelConfig cfg;
  cfg.views = {{"en", Representation::Ctxt, 2}};
  cfg.fusion = FusionMode::AVG;
  cfg.shared_dim = 2;
  cfg.hidden_dim = 2;
  cfg.n_types = 2;
  Parameters params = init_parameters(cfg, 3);
  const Parameters before = params;
  ModelGrads grads = zero_model_grads(params);
  AdamState state = make_adam_state(params);
  TrainConfig tc;
  for (int step = 0; step < 3; ++step) adam_step(params, grads, state, tc);
  CHECK(params_equal(params, before));
  CHECK(state.t == 3);
}

TEST_CASE("adam rejects mismatched state") {
  ModelConfig cfg;
  cfg.views = {{"en", Representation::Ctxt, 2}};
  cfg.fusion = FusionMode::AVG;
  cfg.shared_dim = 2;
  cfg.hidden_dim = 2;
  cfg.n_types = 2;
  Parameters params = init_parameters(cfg, 3);
  ModelGrads grads = zero_model_grads(params);
  AdamState state = make_adam_state(params);
  state.m[0].pop_back();
  TrainConfig tc;
  CHECK_THROWS_AS(adam_step(params, grads, state, tc), ShapeMismatch);
}

TEST_CASE("history csv uses the epoch,loss,dev_f1 layout") {
  std::vector<EpochStat> history = {{1, 0.75, 0.25}, {2, 0.5, 0.625}};
  std::ostringstream out;
  write_history_csv(history, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,loss,dev_f1");
  std::getline(in, line);
  CHECK(line == "1,0.75,0.25");
  std::getline(in, line);
  CHECK(line == "2,0.5,0.625");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("train_multiview is deterministic and learns clean data") {
  GenConfig gen = tiny_gen_config(11);
  gen.n_entities = 480;
  for (auto& lang : gen.languages) {
    lang.availability = 1.0;
    lang.noise = 0.0;
  }
  gen.ambiguity = 0.0;
  const Dataset ds = generate(gen);
  const Split split = stratified_split(ds, SplitSpec{}, 5);

  const TrainConfig tc = fast_train(300, 2);
  const TrainResult a = train_multiview(ds, split, all_views(ds), tiny_model(), tc);
  const TrainResult b = train_multiview(ds, split, all_views(ds), tiny_model(), tc);

  CHECK(a.best_dev_f1 == b.best_dev_f1);
  CHECK(a.best_epoch == b.best_epoch);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(a.history[i].dev_f1 == b.history[i].dev_f1);
  }
  CHECK(params_equal(a.params, b.params));

  CHECK(a.best_dev_f1 >= 0.99);  // noise-free full availability is separable
  CHECK(a.history.front().epoch == 1);
  CHECK(a.history.back().loss < a.history.front().loss);

  const TrainConfig other = fast_train(300, 3);
  const TrainResult c = train_multiview(ds, split, all_views(ds), tiny_model(), other);
  CHECK_FALSE(params_equal(a.params, c.params));
}

TEST_CASE("deterministic and fast modes produce identical results") {
  const GenConfig gen = tiny_gen_config(13);
  const Dataset ds = generate(gen);
  const Split split = stratified_split(ds, SplitSpec{}, 7);

  TrainConfig det = fast_train(6, 4);
  det.deterministic = true;
  TrainConfig fast = det;
  fast.deterministic = false;

  const TrainResult a = train_multiview(ds, split, all_views(ds), tiny_model(), det);
  const TrainResult b = train_multiview(ds, split, all_views(ds), tiny_model(), fast);
  CHECK(params_equal(a.params, b.params));
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(a.history[i].dev_f1 == b.history[i].dev_f1);
  }
}

TEST_CASE("early stopping keeps the best dev epoch") {
  const GenConfig gen = tiny_gen_config(17);
  const Dataset ds = generate(gen);
  const Split split = stratified_split(ds, SplitSpec{}, 9);

  TrainConfig tc = fast_train(60, 5);
  tc.patience = 3;
  const TrainResult r = train_multiview(ds, split, all_views(ds), tiny_model(), tc);

  REQUIRE(!r.history.empty());
  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const auto& stat : r.history) {
    if (stat.dev_f1 > best) {
      best = stat.dev_f1;
      best_epoch = stat.epoch;
    }
  }
  CHECK(r.best_dev_f1 == best);
  CHECK(r.best_epoch == best_epoch);
  // stopped within patience epochs of the best, or hit the cap
  if (r.history.size() < tc.max_epochs) {
    CHECK(r.history.size() == best_epoch + tc.patience);
  }
}

TEST_CASE("train_multiview rejects empty splits and bad view ids") {
  const GenConfig gen = tiny_gen_config(19);
  const Dataset ds = generate(gen);
  Split split = stratified_split(ds, SplitSpec{}, 1);

  Split empty = split;
  empty.train.clear();
  CHECK_THROWS_AS(train_multiview(ds, empty, all_views(ds), tiny_model(), fast_train(2)),
                  EmptySplit);
  empty = split;
  empty.dev.clear();
  CHECK_THROWS_AS(train_multiview(ds, empty, all_views(ds), tiny_model(), fast_train(2)),
                  EmptySplit);
  CHECK_THROWS_AS(
      train_multiview(ds, split, {ds.views.size()}, tiny_model(), fast_train(2)),
      ViewUnknown);
}

TEST_CASE("build_cross_set emits one example per available (entity, view)") {
  const GenConfig gen = tiny_gen_config(23);
  const Dataset ds = generate(gen);

  const auto xs = build_cross_set(ds);
  std::size_t expected = 0;
  for (const auto& e : ds.entities) {
    for (auto m : e.mask) expected += m ? 1 : 0;
  }
  CHECK(xs.size() == expected);

  std::set<std::pair<std::size_t, ViewId>> seen;
  for (const auto& x : xs) {
    CHECK(ds.entities[x.entity].mask[x.view] == 1);
    CHECK(seen.insert({x.entity, x.view}).second);
  }

  const std::vector<std::size_t> subset = {0, 1, 2};
  const auto sub = build_cross_set(ds, subset);
  std::size_t sub_expected = 0;
  for (auto i : subset) {
    for (auto m : ds.entities[i].mask) sub_expected += m ? 1 : 0;
  }
  CHECK(sub.size() == sub_expected);
}

TEST_CASE("train_single rejects unknown views and empty example sets") {
  const GenConfig gen = tiny_gen_config(29);
  Dataset ds = generate(gen);
  const Split split = stratified_split(ds, SplitSpec{}, 2);

  CHECK_THROWS_AS(train_single(ds, split, "xx:ctxt", tiny_model(), fast_train(2)), ViewUnknown);

  // blank out one view entirely: no train examples remain for it
  const ViewId target = ds.view_id("de:name").value();
  for (auto& e : ds.entities) e.mask[target] = 0;
  CHECK_THROWS_AS(train_single(ds, split, "de:name", tiny_model(), fast_train(2)), NoExamples);
}

TEST_CASE("cross equals single when the dataset has exactly one view") {
  GenConfig gen = tiny_gen_config(31);
  gen.languages = {{"en", 1.0, 0.3}};
  gen.representations = {{Representation::Ctxt, 10}};
  const Dataset ds = generate(gen);
  const Split split = stratified_split(ds, SplitSpec{}, 3);

  const TrainConfig tc = fast_train(8, 6);
  const TrainResult single = train_single(ds, split, "en:ctxt", tiny_model(), tc);
  const TrainResult cross = train_cross(ds, split, tiny_model(), tc);

  REQUIRE(single.history.size() == cross.history.size());
  for (std::size_t i = 0; i < single.history.size(); ++i) {
    CHECK(single.history[i].loss == cross.history[i].loss);
    CHECK(single.history[i].dev_f1 == cross.history[i].dev_f1);
  }
  CHECK(params_equal(single.params, cross.params));
}

TEST_CASE("active_param_count matches between SINGLE and CROSS") {
  const GenConfig gen = tiny_gen_config(37);
  const Dataset ds = generate(gen);
  const Split split = stratified_split(ds, SplitSpec{}, 4);
  const TrainConfig tc = fast_train(2, 7);

  const TrainResult cross = train_cross(ds, split, tiny_model(), tc);
  for (std::size_t j = 0; j < ds.views.size(); ++j) {
    const TrainResult single =
        train_single(ds, split, ds.views[j].label(), tiny_model(), tc);
    // single model holds one projection at index 0
    CHECK(active_param_count(single.params, 0) == active_param_count(cross.params, j));
  }
}

TEST_CASE("active_param_count counts one projection plus the head") {
  ModelConfig cfg;
  cfg.views = {{"en", Representation::Ctxt, 3}, {"de", Representation::Ctxt, 5}};
  cfg.fusion = FusionMode::AVG;
  cfg.shared_dim = 4;
  cfg.hidden_dim = 6;
  cfg.n_types = 2;
  Parameters params = init_parameters(cfg, 1);
  const std::size_t head = 6 * 4 + 2 * 6;
  CHECK(active_param_count(params, 0) == 4 * 3 + head);
  CHECK(active_param_count(params, 1) == 4 * 5 + head);

  cfg.bias = true;
  Parameters with_bias = init_parameters(cfg, 1);
  CHECK(active_param_count(with_bias, 0) == 4 * 3 + 4 + head + 6 + 2);
}
