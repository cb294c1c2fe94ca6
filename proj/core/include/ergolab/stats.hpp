#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ergolab {

// Kahan compensated accumulator.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  void merge(const KahanSum& other) noexcept {
    add(other.sum);
    add(-other.carry);
  }
  double value() const noexcept { return sum; }
};

// Streaming log-sum-exp with the running maximum factored out, plus an
// optional weighted companion sum for averages of the form
// sum(e^s * v) / sum(e^s).
struct LogSumExp {
  double max_exp = -std::numeric_limits<double>::infinity();
  KahanSum scaled;    // sum of e^(s - max_exp)
  KahanSum weighted;  // sum of e^(s - max_exp) * v

  void add(double s, double v = 0.0) {
    if (s > max_exp) {
      rescale(s);
    }
    double w = std::exp(s - max_exp);
    scaled.add(w);
    weighted.add(w * v);
  }
  void merge(const LogSumExp& other) {
    if (other.max_exp == -std::numeric_limits<double>::infinity()) return;
    if (other.max_exp > max_exp) rescale(other.max_exp);
    double f = std::exp(other.max_exp - max_exp);
    scaled.add(other.scaled.value() * f);
    weighted.add(other.weighted.value() * f);
  }
  double log_sum() const { return max_exp + std::log(scaled.value()); }
  double weighted_mean() const { return weighted.value() / scaled.value(); }

 private:
  void rescale(double new_max) {
    if (scaled.value() != 0.0) {
      double f = std::exp(max_exp - new_max);
      KahanSum s2, w2;
      s2.add(scaled.value() * f);
      w2.add(weighted.value() * f);
      scaled = s2;
      weighted = w2;
    }
    max_exp = new_max;
  }
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error of the mean over independent values.
inline MeanStderr mean_stderr(const std::vector<double>& values) {
  MeanStderr r;
  r.n = values.size();
  if (r.n == 0) return r;
  KahanSum s;
  for (double v : values) s.add(v);
  r.mean = s.value() / static_cast<double>(r.n);
  if (r.n < 2) return r;
  KahanSum sq;
  for (double v : values) sq.add((v - r.mean) * (v - r.mean));
  double var = sq.value() / static_cast<double>(r.n - 1);
  r.stderr_ = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

}  // namespace ergolab
