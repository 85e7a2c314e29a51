#include <cmath>
#include <numeric>

#include <doctest.h>

#include "mvet/numeric.hpp"

using namespace mvet;

TEST_CASE("vec rejects non-finite values in value constructors") {
  CHECK_THROWS_AS(Vec{std::nan("")}, NonFiniteValue);
  CHECK_THROWS_AS(Vec::of({1.0, INFINITY}), NonFiniteValue);
  CHECK_NOTHROW(Vec(3));  // zero-filled path has nothing to reject
}

TEST_CASE("matvec and transpose agree with explicit sums") {
  const Mat m{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  const Vec v{1.0, -1.0, 2.0};
  const Vec r = matvec(m, v);
  REQUIRE(r.len() == 2);
  CHECK(r[0] == doctest::Approx(5.0));
  CHECK(r[1] == doctest::Approx(11.0));

  const Vec u{1.0, -2.0};
  const Vec rt = matvec_t(m, u);
  REQUIRE(rt.len() == 3);
  CHECK(rt[0] == doctest::Approx(1.0 - 8.0));
  CHECK(rt[1] == doctest::Approx(2.0 - 10.0));
  CHECK(rt[2] == doctest::Approx(3.0 - 12.0));

  CHECK_THROWS_AS(matvec(m, u), DimensionMismatch);
  CHECK_THROWS_AS(matvec_t(m, v), DimensionMismatch);
}

TEST_CASE("axpy, dot, add, scale") {
  const Vec x{1.0, 2.0};
  Vec y{10.0, 20.0};
  axpy(0.5, x, y);
  CHECK(y[0] == doctest::Approx(10.5));
  CHECK(y[1] == doctest::Approx(21.0));
  CHECK(dot(x, x) == doctest::Approx(5.0));
  CHECK(add(x, x)[1] == doctest::Approx(4.0));
  CHECK(scale(x, -2.0)[0] == doctest::Approx(-2.0));
}

TEST_CASE("scalar activations match closed forms") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(leaky(2.0, 0.01) == doctest::Approx(2.0));
  CHECK(leaky(-2.0, 0.01) == doctest::Approx(-0.02));
  CHECK(leaky(0.0, 0.01) == doctest::Approx(0.0));
}

TEST_CASE("registered activations pass a finite-difference check") {
  const double h = 1e-6;
  for (const auto& act : activations()) {
    for (double x : {-1.3, -0.2, 0.4, 1.7}) {
      const double fd = (act.f(x + h) - act.f(x - h)) / (2.0 * h);
      INFO(act.name, " at ", x);
      CHECK(act.df(x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("softmax basics") {
  const Vec logits{1.0, 2.0, 3.0};
  const Vec w = softmax(logits);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.len(); ++i) {
    CHECK(w[i] > 0.0);
    sum += w[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w[2] > w[1]);
  CHECK(w[1] > w[0]);

  // shift invariance
  const Vec shifted = softmax(Vec{101.0, 102.0, 103.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(shifted[i]).epsilon(1e-14));
}

TEST_CASE("masked softmax zeroes masked positions and renormalizes") {
  const Vec logits{5.0, 1.0, 2.0};
  const Mask mask{0, 1, 1};
  const Vec w = softmax(logits, mask);
  CHECK(w[0] == 0.0);
  CHECK(w[1] + w[2] == doctest::Approx(1.0).epsilon(1e-14));
  const Vec two = softmax(Vec{1.0, 2.0});
  CHECK(w[1] == doctest::Approx(two[0]).epsilon(1e-14));

  CHECK_THROWS_AS(softmax(logits, Mask{0, 0, 0}), AllMasked);

  const Mask one{0, 1, 0};
  const Vec single = softmax(logits, one);
  CHECK(single[1] == 1.0);
}

TEST_CASE("order-taking softmax is bitwise stable under permutation") {
  Rng rng(99);
  for (int it = 0; it < 50; ++it) {
    const std::size_t n = 2 + rng.below(6);
    Vec logits(n);
    Mask mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      logits[i] = rng.uniform(-3.0, 3.0);
      mask[i] = rng.uniform() < 0.7 ? 1 : 0;
    }
    mask[rng.below(n)] = 1;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const Vec base = softmax(logits, mask, order);

    // permute inputs, keep the canonical walk pointing at the same items
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Vec plogits(n);
    Mask pmask(n, 0);
    std::vector<std::size_t> porder(n);  // position of original i in the permuted layout
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      plogits[perm[i]] = logits[i];
      pmask[perm[i]] = mask[i];
      pos[i] = perm[i];
    }
    for (std::size_t i = 0; i < n; ++i) porder[i] = pos[order[i]];

    const Vec permuted = softmax(plogits, pmask, porder);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(base[i] == permuted[perm[i]]);  // bitwise
    }
  }
}

TEST_CASE("grad_check approves an analytic gradient and flags a wrong one") {
  const auto f = [](const Vec& v) { return v[0] * v[0] + std::sin(v[1]); };
  const Vec point{0.7, -0.3};
  const Vec good{1.4, std::cos(-0.3)};
  CHECK(grad_check(f, point, good, 1e-5) < 1e-8);
  const Vec bad{1.4, -std::cos(-0.3)};
  CHECK(grad_check(f, point, bad, 1e-5) > 1e-2);
}

TEST_CASE("splitmix64 produces the published reference stream") {
  // Reference values for seed 1234567 from the SplitMix64 description
  // (Steele/Lea/Flood 2014; same constants as the java.util.SplittableRandom
  // mixer).
  Rng rng(1234567);
  CHECK(rng.next_u64() == 6457827717110365317ULL);
  CHECK(rng.next_u64() == 3203168211198807973ULL);
  CHECK(rng.next_u64() == 9817491932198370423ULL);
}

TEST_CASE("rng uniform and below stay in range, shuffle permutes") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto b = rng.below(7);
    CHECK(b < 7);
  }
  std::vector<int> xs(20);
  std::iota(xs.begin(), xs.end(), 0);
  auto ys = xs;
  rng.shuffle(ys);
  auto sorted = ys;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == xs);
  CHECK(ys != xs);  // 20! permutations; identity would be astonishing
}

TEST_CASE("rng normal has sane moments") {
  Rng rng(5);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("derive_seed separates tags and is reproducible") {
  CHECK(derive_seed(1, "split") == derive_seed(1, "split"));
  CHECK(derive_seed(1, "split") != derive_seed(1, "init"));
  CHECK(derive_seed(1, "split") != derive_seed(2, "split"));
}
