#include "ergolab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergolab/stats.hpp"

namespace ergolab {

void AtomicMeasure::reserve(std::size_t n) {
  coords_.reserve(n * static_cast<std::size_t>(dim_));
  weights_.reserve(n);
}

void AtomicMeasure::add_atom(const TorusPoint& p, double weight) {
  if (p.dim() != dim_) fail(errc::invalid_input, "atom dimension mismatch");
  if (!(weight > 0.0) || !std::isfinite(weight))
    fail(errc::invalid_input, "atom weight must be positive and finite");
  for (int i = 0; i < dim_; ++i) coords_.push_back(p[i]);
  weights_.push_back(weight);
}

void AtomicMeasure::normalize() {
  KahanSum s;
  for (double w : weights_) s.add(w);
  double total = s.value();
  if (!(total > 0.0)) fail(errc::invalid_input, "cannot normalize an empty measure");
  for (double& w : weights_) w /= total;
  cdf_.clear();
}

TorusPoint AtomicMeasure::point(std::size_t i) const {
  SmallVec v(dim_);
  for (int k = 0; k < dim_; ++k) v[k] = coords_[i * static_cast<std::size_t>(dim_) + k];
  return TorusPoint(std::move(v));
}

double AtomicMeasure::total_weight() const {
  KahanSum s;
  for (double w : weights_) s.add(w);
  return s.value();
}

void AtomicMeasure::prepare_sampling() {
  cdf_.resize(weights_.size());
  KahanSum s;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    s.add(weights_[i]);
    cdf_[i] = s.value();
  }
}

std::size_t AtomicMeasure::sample_index(StreamRng& rng) const {
  double u = rng.next_unit() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::size_t>(it - cdf_.begin());
}

GridHistogram::GridHistogram(int dim, int resolution) : dim_(dim), resolution_(resolution) {
  if (dim < 1 || dim > 4) fail(errc::invalid_input, "histogram dimension out of range");
  if (resolution < 1) fail(errc::invalid_input, "histogram resolution must be positive");
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(resolution);
  counts_.assign(n, 0);
}

std::size_t GridHistogram::bin_of(const TorusPoint& p) const {
  std::size_t b = 0;
  for (int i = 0; i < dim_; ++i) {
    auto idx = static_cast<std::size_t>(p[i] * resolution_);
    if (idx >= static_cast<std::size_t>(resolution_)) idx = static_cast<std::size_t>(resolution_) - 1;
    b = b * static_cast<std::size_t>(resolution_) + idx;
  }
  return b;
}

TorusPoint GridHistogram::bin_center(std::size_t b) const {
  SmallVec v(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    std::size_t idx = b % static_cast<std::size_t>(resolution_);
    b /= static_cast<std::size_t>(resolution_);
    v[i] = (static_cast<double>(idx) + 0.5) / resolution_;
  }
  return TorusPoint(std::move(v));
}

void GridHistogram::deposit(const TorusPoint& p) {
  ++counts_[bin_of(p)];
  ++total_;
}

void GridHistogram::merge(const GridHistogram& other) {
  if (other.dim_ != dim_ || other.resolution_ != resolution_)
    fail(errc::invalid_input, "histogram shape mismatch in merge");
  for (std::size_t b = 0; b < counts_.size(); ++b) counts_[b] += other.counts_[b];
  total_ += other.total_;
  cdf_.clear();
}

double GridHistogram::mass(std::size_t b) const {
  return total_ == 0 ? 0.0 : static_cast<double>(counts_[b]) / static_cast<double>(total_);
}

double GridHistogram::l1_distance_to_uniform() const {
  if (total_ == 0) fail(errc::invalid_input, "empty histogram");
  double uniform = 1.0 / static_cast<double>(counts_.size());
  KahanSum s;
  for (std::size_t b = 0; b < counts_.size(); ++b) s.add(std::fabs(mass(b) - uniform));
  return s.value();
}

double GridHistogram::l1_distance(const GridHistogram& other) const {
  if (other.dim_ != dim_ || other.resolution_ != resolution_)
    fail(errc::invalid_input, "histogram shape mismatch");
  if (total_ == 0 || other.total_ == 0) fail(errc::invalid_input, "empty histogram");
  KahanSum s;
  for (std::size_t b = 0; b < counts_.size(); ++b) s.add(std::fabs(mass(b) - other.mass(b)));
  return s.value();
}

bool GridHistogram::identical_counts(const GridHistogram& other) const {
  return dim_ == other.dim_ && resolution_ == other.resolution_ && total_ == other.total_ &&
         counts_ == other.counts_;
}

std::string GridHistogram::matrix_text() const {
  if (dim_ != 2) fail(errc::invalid_input, "matrix serialization requires a 2-d histogram");
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < resolution_; ++i) {
    for (int j = 0; j < resolution_; ++j) {
      if (j) os << ' ';
      os << mass(static_cast<std::size_t>(i) * resolution_ + j);
    }
    os << '\n';
  }
  return os.str();
}

void GridHistogram::prepare_sampling() {
  cdf_.resize(counts_.size());
  double acc = 0.0;
  for (std::size_t b = 0; b < counts_.size(); ++b) {
    acc += static_cast<double>(counts_[b]);
    cdf_[b] = acc;
  }
}

TorusPoint GridHistogram::sample(StreamRng& rng) const {
  if (cdf_.empty() || total_ == 0) fail(errc::invalid_input, "histogram not prepared for sampling");
  double u = rng.next_unit() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  std::size_t b = static_cast<std::size_t>(it - cdf_.begin());
  // uniform within the bin
  SmallVec v(dim_);
  std::size_t rem = b;
  for (int i = dim_ - 1; i >= 0; --i) {
    std::size_t idx = rem % static_cast<std::size_t>(resolution_);
    rem /= static_cast<std::size_t>(resolution_);
    v[i] = (static_cast<double>(idx) + rng.next_unit()) / resolution_;
  }
  return reduce_mod1(v);
}

}  // namespace ergolab
