#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/rng.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

// Weighted atoms with flat storage; weights are kept normalized to total 1.
class AtomicMeasure {
 public:
  explicit AtomicMeasure(int dim) : dim_(dim) {}

  void reserve(std::size_t n);
  void add_atom(const TorusPoint& p, double weight);  // raw weight > 0
  void normalize();                                   // scale weights to sum 1

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  TorusPoint point(std::size_t i) const;
  double weight(std::size_t i) const { return weights_[i]; }
  double total_weight() const;

  // weighted draw; prepare_sampling() must have been called once
  void prepare_sampling();
  std::size_t sample_index(StreamRng& rng) const;

  template <class Fn>
  double integrate_with(Fn&& fn) const {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      double x = weights_[i] * fn(point(i)) - c;
      double t = s + x;
      c = (t - s) - x;
      s = t;
    }
    return s;
  }

 private:
  int dim_;
  std::vector<double> coords_;  // dim_ per atom
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

// Regular grid histogram over [0,1)^m with integer deposit counts; masses are
// counts normalized by the total, so merging and reductions are exact and
// independent of evaluation order.
class GridHistogram {
 public:
  GridHistogram(int dim, int resolution);

  int dim() const { return dim_; }
  int resolution() const { return resolution_; }
  std::size_t bins() const { return counts_.size(); }
  std::uint64_t total() const { return total_; }

  void deposit(const TorusPoint& p);
  void merge(const GridHistogram& other);

  std::uint64_t count(std::size_t b) const { return counts_[b]; }
  double mass(std::size_t b) const;
  std::size_t bin_of(const TorusPoint& p) const;
  TorusPoint bin_center(std::size_t b) const;

  double l1_distance_to_uniform() const;
  double l1_distance(const GridHistogram& other) const;
  bool identical_counts(const GridHistogram& other) const;

  // plain text, row-major, one row per line, space-separated (m = 2 only)
  std::string matrix_text() const;

  void prepare_sampling();
  TorusPoint sample(StreamRng& rng) const;  // bin by mass, uniform within bin

  template <class Fn>
  double integrate_with(Fn&& fn) const {
    double s = 0.0, c = 0.0;
    double inv_total = 1.0 / static_cast<double>(total_);
    for (std::size_t b = 0; b < counts_.size(); ++b) {
      if (counts_[b] == 0) continue;
      double x = static_cast<double>(counts_[b]) * inv_total * fn(bin_center(b)) - c;
      double t = s + x;
      c = (t - s) - x;
      s = t;
    }
    return s;
  }

 private:
  int dim_;
  int resolution_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::vector<double> cdf_;
};

}  // namespace ergolab
