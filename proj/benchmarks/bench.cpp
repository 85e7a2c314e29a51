#include <benchmark/benchmark.h>

#include "mvet/fusion.hpp"
#include "mvet/model.hpp"
#include "mvet/views.hpp"

using namespace mvet;

namespace {

Vec random_vec(std::size_t n, Rng& rng) {
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

Mat random_mat(std::size_t r, std::size_t c, Rng& rng) {
  Mat m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

void bm_matvec(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Mat m = random_mat(n, n, rng);
  const Vec v = random_vec(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matvec(m, v));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * n));
}
BENCHMARK(bm_matvec)->Arg(32)->Arg(128)->Arg(512);

struct FusionFixture {
  FusionParams params;
  std::vector<Vec> views;
  Mask mask;

  FusionFixture(FusionMode mode, std::size_t n, std::size_t view_dim, std::size_t d) {
    Rng rng(7);
    params.mode = mode;
    params.fused_dim = d;
    std::size_t concat = 0;
    for (std::size_t j = 0; j < n; ++j) {
      params.view_dims.push_back(view_dim);
      concat += view_dim;
      views.push_back(random_vec(view_dim, rng));
      mask.push_back(j % 3 == 2 ? 0 : 1);
    }
    if (mode == FusionMode::CON) {
      params.w1 = random_mat(d, concat, rng);
    } else {
      for (std::size_t j = 0; j < n; ++j) params.w.push_back(random_mat(d, view_dim, rng));
      if (mode == FusionMode::ATT) params.gate = random_vec(d, rng);
    }
  }
};

void bm_fuse_forward(benchmark::State& state) {
  const auto mode = static_cast<FusionMode>(state.range(0));
  FusionFixture fx(mode, 12, 32, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fuse(fx.views, fx.mask, fx.params));
  }
}
BENCHMARK(bm_fuse_forward)
    ->Arg(static_cast<int>(FusionMode::CON))
    ->Arg(static_cast<int>(FusionMode::ATT))
    ->Arg(static_cast<int>(FusionMode::MAX))
    ->Arg(static_cast<int>(FusionMode::AVG));

void bm_fuse_backward(benchmark::State& state) {
  const auto mode = static_cast<FusionMode>(state.range(0));
  FusionFixture fx(mode, 12, 32, 64);
  const FusionTrace trace = fuse(fx.views, fx.mask, fx.params);
  Rng rng(9);
  const Vec dfused = random_vec(64, rng);
  for (auto _ : state) {
    FusionGrads grads = zero_fusion_grads(fx.params);
    fuse_backward(trace, fx.views, fx.mask, fx.params, dfused, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(bm_fuse_backward)
    ->Arg(static_cast<int>(FusionMode::CON))
    ->Arg(static_cast<int>(FusionMode::ATT))
    ->Arg(static_cast<int>(FusionMode::MAX))
    ->Arg(static_cast<int>(FusionMode::AVG));

void bm_model_step(benchmark::State& state) {
  ModelConfig cfg;
  for (std::size_t j = 0; j < 12; ++j) {
    cfg.views.push_back({"l" + std::to_string(j), Representation::Ctxt, 32});
  }
  cfg.fusion = FusionMode::ATT;
  cfg.shared_dim = 24;
  cfg.hidden_dim = 48;
  cfg.n_types = 20;
  Parameters params = init_parameters(cfg, 1);
  Rng rng(11);
  std::vector<Vec> views;
  Mask mask;
  for (std::size_t j = 0; j < 12; ++j) {
    views.push_back(random_vec(32, rng));
    mask.push_back(j % 4 == 3 ? 0 : 1);
  }
  Vec target(20);
  for (std::size_t t = 0; t < 20; ++t) target[t] = rng.below(2) ? 1.0 : 0.0;
  for (auto _ : state) {
    ModelGrads grads = zero_model_grads(params);
    benchmark::DoNotOptimize(model_forward_backward(views, mask, target, params, grads));
  }
}
BENCHMARK(bm_model_step);

void bm_sgns_pair(benchmark::State& state) {
  Rng rng(13);
  Vec center = random_vec(64, rng);
  Vec context = random_vec(64, rng);
  Vec negative = random_vec(64, rng);
  std::vector<Vec*> negatives = {&negative};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgns_pair_step(center, context, negatives, 0.01));
  }
}
BENCHMARK(bm_sgns_pair);

}  // namespace

BENCHMARK_MAIN();
