#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "mvet/error.hpp"

namespace mvet {

// Dense double-precision vector. Value-taking constructors reject NaN/Inf;
// the zero-filled constructor is used by code that fills entries afterwards.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n) : data_(n, 0.0) {}
  Vec(std::initializer_list<double> xs);
  static Vec of(std::vector<double> xs);

  std::size_t len() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  bool operator==(const Vec&) const = default;

 private:
  std::vector<double> data_;
};

// Row-major dense matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  static Mat of(std::size_t rows, std::size_t cols, std::vector<double> xs);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// result[i] = sum_k m(i,k) * v[k]
Vec matvec(const Mat& m, const Vec& v);

// result[i] = sum_k m(k,i) * v[k]  (transpose product, used by backward passes)
Vec matvec_t(const Mat& m, const Vec& v);

double dot(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double c);
void axpy(double c, const Vec& x, Vec& y);  // y += c * x

double sigmoid(double x);
double leaky(double x, double slope);

Vec tanh_v(const Vec& v);
Vec sigmoid_v(const Vec& v);
Vec leaky_v(const Vec& v, double slope);

// Derivatives expressed in whichever variable is cheapest at the call site.
inline double tanh_prime_from_y(double y) { return 1.0 - y * y; }
inline double sigmoid_prime_from_y(double y) { return y * (1.0 - y); }
inline double leaky_prime(double x, double slope) { return x >= 0.0 ? 1.0 : slope; }

// Activation registry; every entry must pass the finite-difference check.
struct Activation {
  const char* name;
  double (*f)(double);
  double (*df)(double);
};
std::span<const Activation> activations();

using Mask = std::vector<std::uint8_t>;

// Masked softmax. Masked-out positions contribute weight 0; masked-in
// weights are positive and sum to 1. Masking is realized as -inf logits
// ahead of the max-subtraction, so full and partial masks share one path.
Vec softmax(const Vec& logits, const Mask& mask);
Vec softmax(const Vec& logits);

// Reduction-order variant: the exp sum accumulates along `order` (a
// permutation of all indices), so results are bitwise stable under a
// consistent permutation of logits, mask, and order.
Vec softmax(const Vec& logits, const Mask& mask, std::span<const std::size_t> order);

// Relative error between the analytic gradient and a central-difference
// estimate of f around `point`, as a norm ratio:
//   ||g_fd - analytic|| / max(||g_fd||, ||analytic||, 1e-12)
// The norm ratio is scale-free; a per-component maximum would sit at the
// double-precision roundoff floor for components much smaller than the
// gradient norm.
double grad_check(const std::function<double(const Vec&)>& f, const Vec& point,
                  const Vec& analytic_grad, double h);

// SplitMix64 (Steele/Lea/Flood 2014). State advances by the golden-gamma
// increment; each output is a finalizing hash of the state. Identical seed
// gives an identical stream on every platform and run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), multiply-shift bound (bias < 2^-64)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double normal();

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Deterministic fan-out of one master seed into named per-run seeds:
// FNV-1a of the tag folded into the seed, then one SplitMix64 output.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

}  // namespace mvet
