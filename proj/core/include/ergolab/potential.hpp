#pragma once

#include <vector>

#include "ergolab/dynamics.hpp"

namespace ergolab {

// Dimension of the contracting bundle of the linear part.
int stable_dimension(const PerturbedEndo& g);

// Orthonormal frame spanning the stable subspace at x (most-contracted right
// singular directions of the forward cocycle product).
SmallMat stable_frame(const PerturbedEndo& g, const TorusPoint& x,
                      int depth = kDefaultDirectionDepth);

// Orthonormal frame spanning the unstable subspace at a prehistory (generic
// frame pushed forward along the chain).
SmallMat unstable_frame(const PerturbedEndo& g, const Prehistory& h,
                        int depth = kDefaultDirectionDepth);

// log |det of Dg(x) restricted to the subspace spanned by the orthonormal
// frame| (volume expansion factor).
double log_volume_expansion(const PerturbedEndo& g, const TorusPoint& x, const SmallMat& frame);

// One term of a trigonometric-polynomial observable.
struct TrigObsTerm {
  double amplitude = 0.0;
  std::vector<long long> frequency;
  double phase = 0.0;
  bool is_cos = true;
};

// A Holder observable on the torus. The stable potential log|det Dg|E^s| is a
// function of the point; the unstable potential -log|det Dg|E^u| lives on
// prehistories, so its point evaluation realizes the prehistory by a
// deterministic backward walk keyed to the point's bits (a fixed measurable
// representative). Sums along preimage paths, backward walks and periodic
// cycles use the chain itself as the prehistory instead; see the birkhoff_*
// helpers below.
class Potential {
 public:
  enum class Kind { zero, trig_poly, log_abs_det, stable_log_det, unstable_neg_log_det };

  static Potential zero();
  static Potential trig_poly(std::vector<TrigObsTerm> terms);
  static Potential log_abs_det();
  static Potential stable_log_det(int depth = kDefaultDirectionDepth);
  static Potential unstable_neg_log_det(int depth = kDefaultDirectionDepth);

  Kind kind() const { return kind_; }
  int depth() const { return depth_; }
  double offset() const { return offset_; }
  const std::vector<TrigObsTerm>& terms() const { return terms_; }

  // phi + c; constant shifts must cancel exactly in normalized weights
  Potential shifted(double c) const;

  double eval(const PerturbedEndo& g, const TorusPoint& x) const;

 private:
  Potential(Kind k, std::vector<TrigObsTerm> terms, int depth)
      : kind_(k), terms_(std::move(terms)), depth_(depth) {}
  Kind kind_;
  std::vector<TrigObsTerm> terms_;
  int depth_ = kDefaultDirectionDepth;
  double offset_ = 0.0;
};

// S_n phi(x) along the forward orbit of x (pointwise evaluation; additive:
// S_{n+k}(x) = S_n(x) + S_k(g^n x) up to rounding for every kind).
double birkhoff_sum(const PerturbedEndo& g, const Potential& phi, const TorusPoint& x, int n);

// S_n phi(leaf) for a preimage path (path[0] = g^n(leaf), path[n] = leaf).
// The unstable potential uses the path below each evaluation point as its
// prehistory; the stable potential pulls a converged frame down from the
// root, so the whole sum costs O(n + depth).
double birkhoff_path_sum(const PerturbedEndo& g, const Potential& phi,
                         const std::vector<TorusPoint>& path);

// S_n phi(cycle[0]) around a period-n cycle (cycle[j+1] = g(cycle[j]), with
// wrap-around); stable/unstable frames use the periodically repeated chain.
double birkhoff_cycle_sum(const PerturbedEndo& g, const Potential& phi,
                          const std::vector<TorusPoint>& cycle);

}  // namespace ergolab
