#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/rng.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

// One 1-periodic perturbation term: amplitude * sin(2*pi*<frequency, x> + phase)
// added to a single coordinate of the image.
struct TrigTerm {
  int target = 0;
  double amplitude = 0.0;
  std::vector<long long> frequency;
  double phase = 0.0;
};

// The endomorphism x -> Ax + perturbation(x) (mod 1): an integer hyperbolic
// matrix plus trigonometric terms. Every point has exactly d = |det A|
// preimages for admissible perturbations; that assumption is validated at
// use sites, not assumed.
class PerturbedEndo {
 public:
  PerturbedEndo(IntegerMatrix linear, std::vector<TrigTerm> terms, std::string label = "",
                bool require_hyperbolic = true);

  int dim() const { return linear_.dim(); }
  int degree() const { return degree_; }
  const IntegerMatrix& linear() const { return linear_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  const std::string& label() const { return label_; }
  bool is_linear() const { return terms_.empty(); }
  double hyperbolicity_margin() const { return linear_.hyperbolicity_margin(); }
  // true when the sampled sup-norm of the perturbation derivative exceeds
  // half the linear spectral margin (construction-time heuristic; advisory)
  bool perturbation_warning() const { return perturbation_warning_; }
  double perturbation_derivative_sup() const { return perturbation_sup_; }

  const SmallMat& linear_real() const { return a_real_; }
  const SmallMat& linear_inverse() const { return a_inv_; }
  const std::vector<SmallVec>& coset_offsets() const { return coset_offsets_; }

  // covering-space (lifted) map and its derivative
  SmallVec apply_lift(const SmallVec& x) const;
  SmallMat derivative_lift(const SmallVec& x) const;

  TorusPoint apply(const TorusPoint& x) const { return reduce_mod1(apply_lift(x.c)); }
  TorusPoint apply_n(const TorusPoint& x, int n) const;
  SmallMat derivative_at(const TorusPoint& x) const { return derivative_lift(x.c); }
  double log_abs_det(const TorusPoint& x) const;

 private:
  IntegerMatrix linear_;
  std::vector<TrigTerm> terms_;
  std::string label_;
  int degree_;
  SmallMat a_real_, a_inv_;
  std::vector<SmallVec> coset_offsets_;
  double perturbation_sup_ = 0.0;
  bool perturbation_warning_ = false;
};

TorusPoint apply(const PerturbedEndo& g, const TorusPoint& x);
SmallMat derivative(const PerturbedEndo& g, const TorusPoint& x);

// A finite backward orbit (x, x_{-1}, ..., x_{-n}): points[0] is the present.
struct Prehistory {
  std::vector<TorusPoint> points;
  int depth() const { return static_cast<int>(points.size()) - 1; }
  const TorusPoint& present() const { return points.front(); }
  const TorusPoint& deepest() const { return points.back(); }
};

// Max deviation of g(x_{-i}) from x_{-i+1}; the consistency invariant.
double prehistory_defect(const PerturbedEndo& g, const Prehistory& h);

struct NewtonOptions {
  double tolerance = 1e-12;  // residual sup-norm in the covering space
  int max_iterations = 50;
  double collision_distance = 1e-8;
};

// Single preimage branch of y, fixed by the coset representative index.
TorusPoint preimage_branch(const PerturbedEndo& g, const TorusPoint& y, int branch,
                           const NewtonOptions& opts = {});

// All d preimages of y; pairwise-distinctness and round-trip are enforced
// (perturbation_too_large on violation).
std::vector<TorusPoint> preimages(const PerturbedEndo& g, const TorusPoint& y,
                                  double tol = 1e-12);

constexpr std::uint64_t kDefaultTreeBudget = 1ull << 22;

// Depth-first enumeration of the d^n leaves of the preimage tree of z.
// The visitor receives each leaf together with the path from z down to it
// (path.points[0] = z, path.points[n] = leaf); the tree itself is never
// materialized.
void preimage_leaves(const PerturbedEndo& g, const TorusPoint& z, int n,
                     const std::function<void(const TorusPoint&, const Prehistory&)>& visitor,
                     std::uint64_t budget = kDefaultTreeBudget);

std::uint64_t preimage_tree_size(const PerturbedEndo& g, int n, std::uint64_t budget);

constexpr std::uint64_t kDefaultPeriodicBudget = 1000000;

struct ContinuationOptions {
  int homotopy_steps = 8;
  NewtonOptions newton;
  double residual_tolerance = 1e-10;  // torus_distance(g^n(p), p)
};

// Fix(g^n): exact rational lattice solutions for the linear map; Newton
// continuation along an amplitude homotopy from those solutions otherwise.
std::vector<TorusPoint> periodic_points(const PerturbedEndo& g, int n,
                                        std::uint64_t budget = kDefaultPeriodicBudget,
                                        const ContinuationOptions& opts = {},
                                        int workers = 1);

std::uint64_t periodic_point_count(const PerturbedEndo& g, int n);

// Backward random walk of length n from z: each step picks one of the d
// preimage branches uniformly. Deterministic given the rng stream.
Prehistory backward_walk(const PerturbedEndo& g, const TorusPoint& z, int n, StreamRng& rng);

constexpr int kDefaultDirectionDepth = 40;

// Stable direction at x: the most-contracted right singular direction of the
// forward cocycle product over `depth` steps.
SmallVec stable_direction(const PerturbedEndo& g, const TorusPoint& x,
                          int depth = kDefaultDirectionDepth);

// Unstable direction at a prehistory: a fixed generic vector pushed forward
// along the chain x_{-depth} -> ... -> x, normalized at each step.
SmallVec unstable_direction(const PerturbedEndo& g, const Prehistory& h,
                            int depth = kDefaultDirectionDepth);

// Volume expansion of Dg(x) on the line spanned by the unit vector dir.
double log_expansion_along(const PerturbedEndo& g, const TorusPoint& x, const SmallVec& dir);

struct LyapunovReport {
  std::vector<double> exponents;  // sorted descending, nats per iteration
  double sum = 0.0;
  double mean_log_det = 0.0;      // Birkhoff average of log|det Dg| on the same orbit
  double oseledets_defect = 0.0;  // |sum - mean_log_det|
  std::size_t steps = 0;
};

// QR cocycle averages along the forward orbit of x0 (after a transient).
LyapunovReport lyapunov_forward(const PerturbedEndo& g, const TorusPoint& x0, int transient,
                                std::size_t n);

// QR cocycle averages along an explicit orbit segment (consecutive under g).
LyapunovReport lyapunov_along(const PerturbedEndo& g, const std::vector<TorusPoint>& orbit);

// QR cocycle averages along a backward walk traversed forward in time.
LyapunovReport lyapunov_backward(const PerturbedEndo& g, const TorusPoint& z,
                                 std::size_t walk_length, StreamRng& rng);

}  // namespace ergolab
