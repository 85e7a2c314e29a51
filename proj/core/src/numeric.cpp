#include "mvet/numeric.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace mvet {

namespace {

void require_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw NonFiniteValue("non-finite entry");
  }
}

}  // namespace

Vec::Vec(std::initializer_list<double> xs) : data_(xs) { require_finite(data_); }

Vec Vec::of(std::vector<double> xs) {
  require_finite(xs);
  Vec v;
  v.data_ = std::move(xs);
  return v;
}

Mat Mat::of(std::size_t rows, std::size_t cols, std::vector<double> xs) {
  if (xs.size() != rows * cols) throw DimensionMismatch("matrix data length != rows*cols");
  require_finite(xs);
  Mat m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(xs);
  return m;
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Vec matvec(const Mat& m, const Vec& v) {
  if (m.cols() != v.len()) throw DimensionMismatch("matvec: cols != len");
  Vec out(m.rows());
  const double* x = v.data();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) acc += row[k] * x[k];
    out[i] = acc;
  }
  return out;
}

Vec matvec_t(const Mat& m, const Vec& v) {
  if (m.rows() != v.len()) throw DimensionMismatch("matvec_t: rows != len");
  Vec out(m.cols());
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const double* row = m.row(k);
    const double c = v[k];
    for (std::size_t i = 0; i < m.cols(); ++i) out[i] += c * row[i];
  }
  return out;
}

double dot(const Vec& a, const Vec& b) {
  if (a.len() != b.len()) throw DimensionMismatch("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.len(); ++i) acc += a[i] * b[i];
  return acc;
}

Vec add(const Vec& a, const Vec& b) {
  if (a.len() != b.len()) throw DimensionMismatch("add: length mismatch");
  Vec out(a.len());
  for (std::size_t i = 0; i < a.len(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec scale(const Vec& a, double c) {
  Vec out(a.len());
  for (std::size_t i = 0; i < a.len(); ++i) out[i] = a[i] * c;
  return out;
}

void axpy(double c, const Vec& x, Vec& y) {
  if (x.len() != y.len()) throw DimensionMismatch("axpy: length mismatch");
  for (std::size_t i = 0; i < x.len(); ++i) y[i] += c * x[i];
}

double sigmoid(double x) {
  // Evaluate through the negative branch only; exp never overflows.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double leaky(double x, double slope) { return x >= 0.0 ? x : slope * x; }

Vec tanh_v(const Vec& v) {
  Vec out(v.len());
  for (std::size_t i = 0; i < v.len(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Vec sigmoid_v(const Vec& v) {
  Vec out(v.len());
  for (std::size_t i = 0; i < v.len(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

Vec leaky_v(const Vec& v, double slope) {
  Vec out(v.len());
  for (std::size_t i = 0; i < v.len(); ++i) out[i] = leaky(v[i], slope);
  return out;
}

namespace {

double act_tanh(double x) { return std::tanh(x); }
double act_tanh_df(double x) {
  const double y = std::tanh(x);
  return 1.0 - y * y;
}
double act_sigmoid_df(double x) {
  const double y = sigmoid(x);
  return y * (1.0 - y);
}
double act_leaky01(double x) { return leaky(x, 0.01); }
double act_leaky01_df(double x) { return leaky_prime(x, 0.01); }
double act_leaky20(double x) { return leaky(x, 0.2); }
double act_leaky20_df(double x) { return leaky_prime(x, 0.2); }

constexpr std::array<Activation, 4> kActivations = {{
    {"tanh", &act_tanh, &act_tanh_df},
    {"sigmoid", &sigmoid, &act_sigmoid_df},
    {"leaky(0.01)", &act_leaky01, &act_leaky01_df},
    {"leaky(0.2)", &act_leaky20, &act_leaky20_df},
}};

}  // namespace

std::span<const Activation> activations() { return kActivations; }

Vec softmax(const Vec& logits, const Mask& mask, std::span<const std::size_t> order) {
  if (logits.len() != mask.size()) throw DimensionMismatch("softmax: mask length mismatch");
  if (order.size() != logits.len()) throw DimensionMismatch("softmax: order length mismatch");
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double mx = neg_inf;
  for (std::size_t i : order) {
    const double z = mask[i] ? logits[i] : neg_inf;
    if (z > mx) mx = z;
  }
  if (mx == neg_inf) throw AllMasked("softmax: every position masked out");
  Vec out(logits.len());
  double sum = 0.0;
  for (std::size_t i : order) {
    const double z = mask[i] ? logits[i] : neg_inf;
    const double e = std::exp(z - mx);  // exp(-inf) == 0
    out[i] = e;
    sum += e;
  }
  for (std::size_t i = 0; i < logits.len(); ++i) out[i] /= sum;
  return out;
}

Vec softmax(const Vec& logits, const Mask& mask) {
  std::vector<std::size_t> order(logits.len());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  return softmax(logits, mask, order);
}

Vec softmax(const Vec& logits) {
  return softmax(logits, Mask(logits.len(), 1));
}

double grad_check(const std::function<double(const Vec&)>& f, const Vec& point,
                  const Vec& analytic_grad, double h) {
  if (point.len() != analytic_grad.len()) {
    throw DimensionMismatch("grad_check: gradient length mismatch");
  }
  if (!(h > 0.0)) throw Error("grad_check: h must be positive");
  Vec x = point;
  double diff2 = 0.0, fd2 = 0.0, an2 = 0.0;
  for (std::size_t i = 0; i < point.len(); ++i) {
    const double xi = point[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NonFiniteFunctionValue("grad_check: f not finite near point");
    }
    const double g_fd = (fp - fm) / (2.0 * h);
    diff2 += (g_fd - analytic_grad[i]) * (g_fd - analytic_grad[i]);
    fd2 += g_fd * g_fd;
    an2 += analytic_grad[i] * analytic_grad[i];
  }
  const double denom = std::max(std::sqrt(std::max(fd2, an2)), 1e-12);
  return std::sqrt(diff2) / denom;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u clamped away from 0 so log stays finite.
  double u = uniform();
  if (u <= 0.0) u = 0x1.0p-53;
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double theta = 6.283185307179586476925286766559 * v;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a offset basis
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  Rng mix(seed ^ h);
  return mix.next_u64();
}

}  // namespace mvet
