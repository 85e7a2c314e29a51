#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "mvet/fusion.hpp"

using namespace mvet;

namespace {

Mat identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

FusionParams random_params(FusionMode mode, std::size_t n, std::size_t d, Rng& rng,
                           bool bias = false) {
  FusionParams p;
  p.mode = mode;
  p.fused_dim = d;
  for (std::size_t j = 0; j < n; ++j) p.view_dims.push_back(1 + rng.below(4));
  const auto fill = [&](Mat& m) {
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  };
  if (mode == FusionMode::CON) {
    p.w1 = Mat(d, p.concat_dim());
    fill(p.w1);
    if (bias) {
      p.b1 = Vec(d);
      for (std::size_t i = 0; i < d; ++i) p.b1[i] = rng.uniform(-0.5, 0.5);
    }
  } else {
    p.w.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      p.w[j] = Mat(d, p.view_dims[j]);
      fill(p.w[j]);
    }
    if (bias) {
      p.b.assign(n, Vec(d));
      for (auto& bj : p.b) {
        for (std::size_t i = 0; i < d; ++i) bj[i] = rng.uniform(-0.5, 0.5);
      }
    }
    if (mode == FusionMode::ATT) {
      p.gate = Vec(d);
      for (std::size_t i = 0; i < d; ++i) p.gate[i] = rng.uniform(-1.0, 1.0);
    }
  }
  return p;
}

std::vector<Vec> random_views(const FusionParams& p, Rng& rng) {
  std::vector<Vec> views(p.n_views());
  for (std::size_t j = 0; j < p.n_views(); ++j) {
    views[j] = Vec(p.view_dims[j]);
    for (std::size_t k = 0; k < views[j].len(); ++k) views[j][k] = rng.uniform(-1.5, 1.5);
  }
  return views;
}

Mask random_mask(std::size_t n, Rng& rng) {
  Mask mask(n, 0);
  for (auto& m : mask) m = rng.uniform() < 0.7 ? 1 : 0;
  mask[rng.below(n)] = 1;
  return mask;
}

// Finite-difference check of every parameter tensor and every available view
// against fuse_backward, under the linear objective L = c . fused.
double fusion_grad_error(const FusionParams& params, const std::vector<Vec>& views,
                         const Mask& mask, Rng& rng) {
  Vec c(params.fused_dim);
  for (std::size_t i = 0; i < c.len(); ++i) c[i] = rng.uniform(-1.0, 1.0);

  const FusionTrace trace = fuse(views, mask, params);
  FusionGrads grads = zero_fusion_grads(params);
  fuse_backward(trace, views, mask, params, c, grads);

  FusionParams ps = params;        // perturbed in place by the probes
  std::vector<Vec> vs = views;
  double worst = 0.0;
  const auto probe = [&](double* data, std::size_t size, const double* analytic) {
    Vec point(size);
    std::copy(data, data + size, point.data());
    Vec grad(size);
    std::copy(analytic, analytic + size, grad.data());
    const auto f = [&](const Vec& x) {
      std::copy(x.data(), x.data() + size, data);
      const double val = dot(c, fuse(vs, mask, ps).fused);
      std::copy(point.data(), point.data() + size, data);
      return val;
    };
    worst = std::max(worst, grad_check(f, point, grad, 1e-5));
  };

  if (ps.mode == FusionMode::CON) {
    probe(ps.w1.data(), ps.w1.size(), grads.dw1.data());
    if (ps.b1.len()) probe(ps.b1.data(), ps.b1.len(), grads.db1.data());
  } else {
    for (std::size_t j = 0; j < ps.n_views(); ++j) {
      probe(ps.w[j].data(), ps.w[j].size(), grads.dw[j].data());
    }
    if (!ps.b.empty()) {
      for (std::size_t j = 0; j < ps.n_views(); ++j) {
        probe(ps.b[j].data(), ps.b[j].len(), grads.db[j].data());
      }
    }
    if (ps.mode == FusionMode::ATT) probe(ps.gate.data(), ps.gate.len(), grads.dgate.data());
  }
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (!mask[j]) continue;
    probe(vs[j].data(), vs[j].len(), grads.dviews[j].data());
  }
  return worst;
}

}  // namespace

TEST_CASE("fuse_con matches the scalar worked examples") {
  // n=1, identity W1, zero input
  FusionParams id;
  id.mode = FusionMode::CON;
  id.view_dims = {3};
  id.fused_dim = 3;
  id.w1 = identity(3);
  const FusionTrace zero = fuse_con({Vec(3)}, {1}, id);
  CHECK(zero.fused == Vec(3));

  // n=2, d_j=1, W1=[[1,1]]
  FusionParams p;
  p.mode = FusionMode::CON;
  p.view_dims = {1, 1};
  p.fused_dim = 1;
  p.w1 = Mat{{1.0, 1.0}};
  const FusionTrace both = fuse_con({Vec{0.3}, Vec{0.2}}, {1, 1}, p);
  CHECK(both.fused[0] == doctest::Approx(0.46211715726000974).epsilon(1e-15));

  // zero-fill rule: masked second view contributes nothing
  const FusionTrace one = fuse_con({Vec{0.3}, Vec{0.2}}, {1, 0}, p);
  CHECK(one.fused[0] == doctest::Approx(0.2913126124515909).epsilon(1e-15));

  CHECK_THROWS_AS(fuse_con({Vec{0.3}, Vec{0.2}}, {0, 0}, p), AllViewsMissing);
}

TEST_CASE("fuse_con with one view degenerates to tanh(W1 v)") {
  Rng rng(21);
  FusionParams p = random_params(FusionMode::CON, 1, 4, rng);
  std::vector<Vec> views = random_views(p, rng);
  const FusionTrace t = fuse_con(views, {1}, p);
  const Vec direct = tanh_v(matvec(p.w1, views[0]));
  CHECK(t.fused == direct);  // same arithmetic path, bitwise
}

TEST_CASE("fuse_att matches the worked example") {
  FusionParams p;
  p.mode = FusionMode::ATT;
  p.view_dims = {1, 1};
  p.fused_dim = 1;
  p.w = {Mat{{2.0}}, Mat{{1.0}}};
  p.gate = Vec{1.0};

  const FusionTrace t = fuse_att({Vec{0.25}, Vec{1.0}}, {1, 1}, p);
  CHECK(t.projected[0][0] == doctest::Approx(0.46211715726000974).epsilon(1e-15));
  CHECK(t.projected[1][0] == doctest::Approx(0.76159415595576485).epsilon(1e-15));
  CHECK(t.alphas[0] == doctest::Approx(0.42568534017919879).epsilon(1e-14));
  CHECK(t.alphas[1] == doctest::Approx(0.57431465982080121).epsilon(1e-14));
  CHECK(t.fused[0] == doctest::Approx(0.63411118789011689).epsilon(1e-14));
  CHECK(std::abs(t.alphas[0] - 0.42569) < 1e-5);
  CHECK(std::abs(t.fused[0] - 0.63412) < 1e-4);
}

TEST_CASE("fuse_att single available view gets weight one") {
  Rng rng(4);
  FusionParams p = random_params(FusionMode::ATT, 3, 4, rng);
  std::vector<Vec> views = random_views(p, rng);
  const FusionTrace t = fuse_att(views, {0, 1, 0}, p);
  CHECK(t.alphas[0] == 0.0);
  CHECK(t.alphas[1] == 1.0);
  CHECK(t.alphas[2] == 0.0);
  CHECK(t.fused == t.projected[1]);
}

TEST_CASE("fuse_att weights are positive and sum to one over available views") {
  Rng rng(17);
  for (int it = 0; it < 40; ++it) {
    const std::size_t n = 2 + rng.below(6);
    FusionParams p = random_params(FusionMode::ATT, n, 3, rng);
    const auto views = random_views(p, rng);
    const Mask mask = random_mask(n, rng);
    const FusionTrace t = fuse_att(views, mask, p);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[j]) {
        CHECK(t.alphas[j] > 0.0);
        CHECK(t.alphas[j] < 1.0 + 1e-15);
        sum += t.alphas[j];
      } else {
        CHECK(t.alphas[j] == 0.0);
      }
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fuse_att with zero gate equals fuse_avg within 1e-12") {
  Rng rng(33);
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 1 + rng.below(6);
    FusionParams p = random_params(FusionMode::ATT, n, 1 + rng.below(5), rng);
    p.gate = Vec(p.fused_dim);  // a = 0
    const auto views = random_views(p, rng);
    const Mask mask = random_mask(n, rng);

    const FusionTrace att = fuse_att(views, mask, p);
    FusionParams q = p;
    q.mode = FusionMode::AVG;
    q.gate = Vec();
    const FusionTrace avg = fuse_avg(views, mask, q);
    for (std::size_t i = 0; i < p.fused_dim; ++i) {
      CHECK(std::abs(att.fused[i] - avg.fused[i]) <= 1e-12);
    }
  }
}

TEST_CASE("fuse_max pools per dimension and records first winners") {
  FusionParams p;
  p.mode = FusionMode::MAX;
  p.view_dims = {2, 2};
  p.fused_dim = 2;
  p.w = {identity(2), identity(2)};

  // choose inputs so projections land on round values after tanh
  const Vec v1{0.54930614433405478, -0.20273255405408219};  // atanh(0.5), atanh(-0.2)
  const Vec v2{0.10033534773107558, 0.30951960420311175};   // atanh(0.1), atanh(0.3)
  const FusionTrace t = fuse_max({v1, v2}, {1, 1}, p);
  CHECK(t.fused[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.fused[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(t.winner[0] == 0);
  CHECK(t.winner[1] == 1);

  // single view: identity pooling
  const FusionTrace solo = fuse_max({v1, v2}, {1, 0}, p);
  CHECK(solo.fused == solo.projected[0]);

  // exact tie routes to the lower view index
  const FusionTrace tie = fuse_max({v1, v1}, {1, 1}, p);
  CHECK(tie.winner[0] == 0);
  CHECK(tie.winner[1] == 0);
}

TEST_CASE("max tie routes gradient to the first view only") {
  FusionParams p;
  p.mode = FusionMode::MAX;
  p.view_dims = {1, 1};
  p.fused_dim = 1;
  p.w = {Mat{{1.0}}, Mat{{1.0}}};
  const std::vector<Vec> views = {Vec{0.4}, Vec{0.4}};
  const Mask mask{1, 1};
  const FusionTrace t = fuse_max(views, mask, p);
  FusionGrads g = zero_fusion_grads(p);
  fuse_backward(t, views, mask, p, Vec{1.0}, g);
  CHECK(g.dviews[0][0] != 0.0);
  CHECK(g.dviews[1][0] == 0.0);
  CHECK(g.dw[1](0, 0) == 0.0);
}

TEST_CASE("fuse_avg averages over available views only") {
  Rng rng(8);
  FusionParams p = random_params(FusionMode::AVG, 3, 4, rng);
  const auto views = random_views(p, rng);

  const FusionTrace both = fuse_avg(views, {1, 1, 0}, p);
  for (std::size_t i = 0; i < 4; ++i) {
    const double mean = 0.5 * (both.projected[0][i] + both.projected[1][i]);
    CHECK(both.fused[i] == doctest::Approx(mean).epsilon(1e-15));
  }
  CHECK(both.alphas[2] == 0.0);

  const FusionTrace solo = fuse_avg(views, {0, 0, 1}, p);
  CHECK(solo.fused == solo.projected[2]);
}

TEST_CASE("dispatcher routes on mode") {
  Rng rng(12);
  for (FusionMode mode : {FusionMode::CON, FusionMode::ATT, FusionMode::MAX, FusionMode::AVG}) {
    FusionParams p = random_params(mode, 2, 3, rng);
    const auto views = random_views(p, rng);
    const FusionTrace t = fuse(views, {1, 1}, p);
    CHECK(t.mode == mode);
    CHECK(t.fused.len() == 3);
  }
}

TEST_CASE("permuting views with their parameters reproduces p bitwise") {
  Rng rng(71);
  for (int it = 0; it < 60; ++it) {
    const std::size_t n = 2 + rng.below(7);
    const FusionMode mode =
        std::array{FusionMode::CON, FusionMode::ATT, FusionMode::MAX, FusionMode::AVG}[rng.below(4)];
    FusionParams p = random_params(mode, n, 1 + rng.below(4), rng);
    p.view_labels.clear();
    for (std::size_t j = 0; j < n; ++j) p.view_labels.push_back("view" + std::to_string(j));
    const auto views = random_views(p, rng);
    const Mask mask = random_mask(n, rng);
    const Vec base = fuse(views, mask, p).fused;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    FusionParams q = p;
    std::vector<Vec> pviews(n);
    Mask pmask(n);
    for (std::size_t j = 0; j < n; ++j) {
      q.view_dims[perm[j]] = p.view_dims[j];
      q.view_labels[perm[j]] = p.view_labels[j];
      pviews[perm[j]] = views[j];
      pmask[perm[j]] = mask[j];
      if (mode != FusionMode::CON) {
        q.w[perm[j]] = p.w[j];
        if (!p.b.empty()) q.b[perm[j]] = p.b[j];
      }
    }
    if (mode == FusionMode::CON) {
      // permute the column blocks of W1 to follow the views
      std::vector<std::size_t> off(n + 1, 0), qoff(n + 1, 0);
      for (std::size_t j = 0; j < n; ++j) off[j + 1] = off[j] + p.view_dims[j];
      for (std::size_t j = 0; j < n; ++j) qoff[j + 1] = qoff[j] + q.view_dims[j];
      q.w1 = Mat(p.fused_dim, p.concat_dim());
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < p.fused_dim; ++i) {
          for (std::size_t k = 0; k < p.view_dims[j]; ++k) {
            q.w1(i, qoff[perm[j]] + k) = p.w1(i, off[j] + k);
          }
        }
      }
    }

    const Vec permuted = fuse(pviews, pmask, q).fused;
    CHECK(base == permuted);  // bitwise
  }
}

TEST_CASE("upstream zero gradient yields zero parameter gradients") {
  Rng rng(2);
  FusionParams p = random_params(FusionMode::ATT, 3, 4, rng);
  const auto views = random_views(p, rng);
  const Mask mask{1, 1, 1};
  const FusionTrace t = fuse_att(views, mask, p);
  FusionGrads g = zero_fusion_grads(p);
  fuse_backward(t, views, mask, p, Vec(4), g);
  for (const auto& m : g.dw) {
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.data()[i] == 0.0);
  }
  CHECK(g.dgate == Vec(4));
}

TEST_CASE("backward rejects mismatched traces") {
  Rng rng(14);
  FusionParams p = random_params(FusionMode::AVG, 2, 3, rng);
  const auto views = random_views(p, rng);
  const Mask mask{1, 1};
  const FusionTrace t = fuse_avg(views, mask, p);
  FusionGrads g = zero_fusion_grads(p);

  FusionParams other = p;
  other.mode = FusionMode::MAX;
  FusionGrads og = zero_fusion_grads(other);
  CHECK_THROWS_AS(fuse_backward(t, views, mask, other, Vec(3), og), TraceMismatch);
  CHECK_THROWS_AS(fuse_backward(t, views, Mask{1, 0}, p, Vec(3), g), TraceMismatch);
  CHECK_THROWS_AS(fuse_backward(t, views, mask, p, Vec(2), g), TraceMismatch);
}

TEST_CASE("all fusion backward passes survive finite-difference checks") {
  Rng rng(555);
  const std::array<FusionMode, 4> modes{FusionMode::CON, FusionMode::ATT, FusionMode::MAX,
                                        FusionMode::AVG};
  const std::array<std::size_t, 3> sizes{1, 3, 12};
  int cases = 0;
  for (int it = 0; it < 25; ++it) {
    for (FusionMode mode : modes) {
      const std::size_t n = sizes[it % sizes.size()];
      const bool bias = it % 2 == 1;
      FusionParams p = random_params(mode, n, 1 + rng.below(4), rng, bias);
      const auto views = random_views(p, rng);
      const Mask mask = random_mask(n, rng);
      const double err = fusion_grad_error(p, views, mask, rng);
      INFO(to_string(mode), " n=", n, " bias=", bias);
      CHECK(err <= 1e-7);
      ++cases;
    }
  }
  CHECK(cases == 100);
}
