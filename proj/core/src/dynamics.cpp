#include "ergolab/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "ergolab/stats.hpp"

namespace ergolab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double dot_freq(const std::vector<long long>& freq, const SmallVec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i)
    s += static_cast<double>(freq[i]) * x[static_cast<Eigen::Index>(i)];
  return s;
}

}  // namespace

PerturbedEndo::PerturbedEndo(IntegerMatrix linear, std::vector<TrigTerm> terms, std::string label,
                             bool require_hyperbolic)
    : linear_(std::move(linear)), terms_(std::move(terms)), label_(std::move(label)) {
  long long det = linear_.determinant();
  if (det == 0) fail(errc::validation_error, "linear part is singular");
  if (require_hyperbolic) linear_.require_hyperbolic();
  degree_ = static_cast<int>(std::llabs(det));
  a_real_ = linear_.to_real();
  a_inv_ = a_real_.inverse();

  for (const auto& t : terms_) {
    if (t.target < 0 || t.target >= dim())
      fail(errc::validation_error, "perturbation term targets a coordinate out of range");
    if (static_cast<int>(t.frequency.size()) != dim())
      fail(errc::validation_error, "perturbation frequency has wrong dimension");
    if (!std::isfinite(t.amplitude) || !std::isfinite(t.phase))
      fail(errc::validation_error, "perturbation term has non-finite parameters");
  }
  // drop zero-amplitude terms so is_linear() sees through trivial perturbations
  std::erase_if(terms_, [](const TrigTerm& t) { return t.amplitude == 0.0; });

  auto reps = coset_representatives(linear_);
  coset_offsets_.reserve(reps.size());
  for (const auto& k : reps) {
    SmallVec v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = static_cast<double>(k[i]);
    coset_offsets_.push_back(std::move(v));
  }

  if (!terms_.empty()) {
    // sample the sup-norm of the perturbation derivative on a 64^m grid
    int side = 64;
    long long cells = 1;
    for (int i = 0; i < dim(); ++i) cells *= side;
    SmallVec x(dim());
    double sup = 0.0;
    for (long long c = 0; c < cells; ++c) {
      long long rem = c;
      for (int i = 0; i < dim(); ++i) {
        x[i] = static_cast<double>(rem % side) / side;
        rem /= side;
      }
      SmallMat dp = derivative_lift(x) - a_real_;
      sup = std::max(sup, dp.cwiseAbs().rowwise().sum().maxCoeff());
    }
    perturbation_sup_ = sup;
    perturbation_warning_ = sup >= 0.5 * linear_.hyperbolicity_margin();
  }
}

SmallVec PerturbedEndo::apply_lift(const SmallVec& x) const {
  SmallVec y = a_real_ * x;
  for (const auto& t : terms_)
    y[t.target] += t.amplitude * std::sin(kTwoPi * dot_freq(t.frequency, x) + t.phase);
  return y;
}

SmallMat PerturbedEndo::derivative_lift(const SmallVec& x) const {
  SmallMat d = a_real_;
  for (const auto& t : terms_) {
    double c = t.amplitude * kTwoPi * std::cos(kTwoPi * dot_freq(t.frequency, x) + t.phase);
    for (int j = 0; j < dim(); ++j) d(t.target, j) += c * static_cast<double>(t.frequency[j]);
  }
  return d;
}

TorusPoint PerturbedEndo::apply_n(const TorusPoint& x, int n) const {
  TorusPoint p = x;
  for (int i = 0; i < n; ++i) p = apply(p);
  return p;
}

double PerturbedEndo::log_abs_det(const TorusPoint& x) const {
  return std::log(std::fabs(derivative_lift(x.c).determinant()));
}

TorusPoint apply(const PerturbedEndo& g, const TorusPoint& x) { return g.apply(x); }

SmallMat derivative(const PerturbedEndo& g, const TorusPoint& x) { return g.derivative_at(x); }

double prehistory_defect(const PerturbedEndo& g, const Prehistory& h) {
  double worst = 0.0;
  for (std::size_t i = 1; i < h.points.size(); ++i)
    worst = std::max(worst, torus_distance(g.apply(h.points[i]), h.points[i - 1]));
  return worst;
}

TorusPoint preimage_branch(const PerturbedEndo& g, const TorusPoint& y, int branch,
                           const NewtonOptions& opts) {
  const SmallVec& k = g.coset_offsets()[static_cast<std::size_t>(branch)];
  SmallVec seed_lift = g.linear_inverse() * (y.c + k);
  TorusPoint x0 = reduce_mod1(seed_lift);
  if (g.is_linear()) return x0;

  // Lifted equation g~(x) = y + kappa, with kappa locking the branch to the
  // coset the linear seed lands in.
  SmallVec x = x0.c;
  SmallVec image = g.apply_lift(x);
  SmallVec target = y.c;
  for (int i = 0; i < g.dim(); ++i) target[i] += std::round(image[i] - y.c[i]);

  for (int it = 0; it < opts.max_iterations; ++it) {
    SmallVec r = g.apply_lift(x) - target;
    if (r.cwiseAbs().maxCoeff() < opts.tolerance) return reduce_mod1(x);
    SmallMat j = g.derivative_lift(x);
    x -= j.partialPivLu().solve(r);
  }
  fail(errc::perturbation_too_large,
       "preimage Newton iteration did not converge in " + std::to_string(opts.max_iterations) +
           " steps (branch " + std::to_string(branch) + ")");
}

std::vector<TorusPoint> preimages(const PerturbedEndo& g, const TorusPoint& y, double tol) {
  if (tol <= 0.0) fail(errc::invalid_input, "preimages: tolerance must be positive");
  if (y.dim() != g.dim()) fail(errc::invalid_input, "preimages: dimension mismatch");
  NewtonOptions opts;
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(g.degree()));
  for (int b = 0; b < g.degree(); ++b) {
    TorusPoint p = preimage_branch(g, y, b, opts);
    double rt = torus_distance(g.apply(p), y);
    if (rt >= tol)
      fail(errc::perturbation_too_large, "preimage round-trip residual " + std::to_string(rt));
    out.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (torus_distance(out[i], out[j]) < opts.collision_distance)
        fail(errc::perturbation_too_large,
             "two preimage branches collided; the map is no longer d-to-1");
  return out;
}

std::uint64_t preimage_tree_size(const PerturbedEndo& g, int n, std::uint64_t budget) {
  std::uint64_t leaves = 1;
  for (int i = 0; i < n; ++i) {
    if (leaves > budget / static_cast<std::uint64_t>(g.degree()))
      fail(errc::tree_budget, "preimage tree needs d^n = " + std::to_string(g.degree()) + "^" +
                                  std::to_string(n) + " leaves, over the budget of " +
                                  std::to_string(budget));
    leaves *= static_cast<std::uint64_t>(g.degree());
  }
  return leaves;
}

namespace {

void leaves_dfs(const PerturbedEndo& g, int remaining, Prehistory& path,
                const std::function<void(const TorusPoint&, const Prehistory&)>& visitor) {
  if (remaining == 0) {
    visitor(path.points.back(), path);
    return;
  }
  const TorusPoint y = path.points.back();
  for (int b = 0; b < g.degree(); ++b) {
    path.points.push_back(preimage_branch(g, y, b));
    leaves_dfs(g, remaining - 1, path, visitor);
    path.points.pop_back();
  }
}

}  // namespace

void preimage_leaves(const PerturbedEndo& g, const TorusPoint& z, int n,
                     const std::function<void(const TorusPoint&, const Prehistory&)>& visitor,
                     std::uint64_t budget) {
  if (n < 1) fail(errc::invalid_input, "preimage_leaves: depth must be >= 1");
  preimage_tree_size(g, n, budget);
  Prehistory path;
  path.points.reserve(static_cast<std::size_t>(n) + 1);
  path.points.push_back(z);
  leaves_dfs(g, n, path, visitor);
}

std::uint64_t periodic_point_count(const PerturbedEndo& g, int n) {
  IntegerMatrix b = g.linear().power(n).minus_identity();
  long long det = b.determinant();
  if (det == 0)
    fail(errc::degenerate_period, "A^n - I is singular at n = " + std::to_string(n));
  return static_cast<std::uint64_t>(std::llabs(det));
}

namespace {

// One Newton solve of g_s^n(x) = x (mod Z^m) in the lift; the residual is the
// nearest-integer fractional part, valid because the iterates stay close to
// the previous homotopy solution.
TorusPoint newton_periodic(const PerturbedEndo& gs, const TorusPoint& guess, int n,
                           const NewtonOptions& opts) {
  SmallVec x = guess.c;
  for (int it = 0; it < opts.max_iterations; ++it) {
    SmallVec y = x;
    SmallMat jac = SmallMat::Identity(gs.dim(), gs.dim());
    for (int i = 0; i < n; ++i) {
      TorusPoint yi = reduce_mod1(y);
      jac = gs.derivative_lift(yi.c) * jac;
      y = gs.apply_lift(yi.c);
    }
    SmallVec frac(gs.dim());
    for (int i = 0; i < gs.dim(); ++i) {
      double r = y[i] - x[i];
      frac[i] = r - std::round(r);
    }
    if (frac.cwiseAbs().maxCoeff() < opts.tolerance) return reduce_mod1(x);
    SmallMat m = jac - SmallMat::Identity(gs.dim(), gs.dim());
    x -= m.partialPivLu().solve(frac);
  }
  fail(errc::perturbation_too_large, "periodic-point Newton did not converge");
}

TorusPoint continue_periodic_point(const PerturbedEndo& g, const TorusPoint& start, int n,
                                   const ContinuationOptions& opts) {
  TorusPoint p = start;
  for (int step = 1; step <= opts.homotopy_steps; ++step) {
    double s = static_cast<double>(step) / opts.homotopy_steps;
    std::vector<TrigTerm> scaled = g.terms();
    for (auto& t : scaled) t.amplitude *= s;
    PerturbedEndo gs(g.linear(), std::move(scaled), "", false);
    p = newton_periodic(gs, p, n, opts.newton);
  }
  double res = torus_distance(g.apply_n(p, n), p);
  if (res > opts.residual_tolerance)
    fail(errc::perturbation_too_large,
         "continued periodic point has residual " + std::to_string(res));
  return p;
}

}  // namespace

std::vector<TorusPoint> periodic_points(const PerturbedEndo& g, int n, std::uint64_t budget,
                                        const ContinuationOptions& opts, int workers) {
  if (n < 1) fail(errc::invalid_input, "periodic_points: period must be >= 1");
  std::uint64_t count = periodic_point_count(g, n);
  if (count > budget)
    fail(errc::tree_budget, "|Fix(g^" + std::to_string(n) + ")| = " + std::to_string(count) +
                                " exceeds the budget of " + std::to_string(budget));
  IntegerMatrix b = g.linear().power(n).minus_identity();
  std::vector<TorusPoint> pts = periodic_lattice_points(b);
  if (g.is_linear()) return pts;

  std::vector<TorusPoint> out(pts.size());
  std::exception_ptr first_error = nullptr;
  std::mutex err_mutex;
  std::atomic<bool> failed{false};
  auto work = [&](std::size_t i) {
    if (failed.load(std::memory_order_relaxed)) return;
    try {
      out[i] = continue_periodic_point(g, pts[i], n, opts);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!first_error) first_error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < pts.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto run = [&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= pts.size()) break;
        work(i);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (torus_distance(out[i], out[j]) < opts.newton.collision_distance)
        fail(errc::perturbation_too_large, "periodic-point continuation produced a collision");
  return out;
}

Prehistory backward_walk(const PerturbedEndo& g, const TorusPoint& z, int n, StreamRng& rng) {
  if (n < 1) fail(errc::invalid_input, "backward_walk: length must be >= 1");
  Prehistory h;
  h.points.reserve(static_cast<std::size_t>(n) + 1);
  h.points.push_back(z);
  for (int i = 0; i < n; ++i) {
    int branch = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(g.degree())));
    h.points.push_back(preimage_branch(g, h.points.back(), branch));
  }
  return h;
}

namespace {

// Fixed generic seed for pushforwards; decaying components keep it away from
// the stable bundle of the integer matrices in scope, and a fixed value keeps
// runs reproducible.
SmallVec generic_seed(int dim) {
  SmallVec v(dim);
  double a = 1.0;
  for (int i = 0; i < dim; ++i) {
    v[i] = a;
    a *= 0.37;
  }
  return v / v.norm();
}

void check_cocycle_hyperbolic(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
  double smin = svd.singularValues().tail(1)[0];
  double smax = svd.singularValues()[0];
  if (!(smax > 0.0) || smin <= 0.0 || smax / smin < 1.0 + 1e-6)
    fail(errc::hyperbolicity_loss, "cocycle product has no singular-value gap");
}

}  // namespace

SmallVec stable_direction(const PerturbedEndo& g, const TorusPoint& x, int depth) {
  if (depth < 1) fail(errc::invalid_input, "stable_direction: depth must be >= 1");
  SmallMat prod = SmallMat::Identity(g.dim(), g.dim());
  TorusPoint p = x;
  for (int i = 0; i < depth; ++i) {
    prod = g.derivative_at(p) * prod;
    p = g.apply(p);
    // rescale long products; only directions matter
    double scale = prod.cwiseAbs().maxCoeff();
    if (scale > 1e100) prod /= scale;
  }
  Eigen::MatrixXd m = prod;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  check_cocycle_hyperbolic(svd);
  Eigen::VectorXd v = svd.matrixV().col(g.dim() - 1);
  SmallVec out(g.dim());
  for (int i = 0; i < g.dim(); ++i) out[i] = v[i];
  if (out[0] < 0) out = -out;  // fixed orientation
  return out;
}

SmallVec unstable_direction(const PerturbedEndo& g, const Prehistory& h, int depth) {
  if (h.depth() < 1) fail(errc::invalid_input, "unstable_direction: empty prehistory");
  int steps = std::min(depth, h.depth());
  SmallVec v = generic_seed(g.dim());
  for (int i = steps; i >= 1; --i) {
    SmallVec w = g.derivative_at(h.points[static_cast<std::size_t>(i)]) * v;
    double n = w.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      fail(errc::hyperbolicity_loss, "unstable pushforward degenerated");
    v = w / n;
  }
  if (v[0] < 0) v = -v;
  return v;
}

double log_expansion_along(const PerturbedEndo& g, const TorusPoint& x, const SmallVec& dir) {
  return std::log((g.derivative_at(x) * dir).norm());
}

namespace {

// Gram-Schmidt QR step: q is orthonormalized in place, the log of each
// diagonal scale accumulates into log_diag.
void qr_accumulate(SmallMat& q, std::vector<KahanSum>& log_diag) {
  int n = static_cast<int>(q.cols());
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) {
      double proj = q.col(k).dot(q.col(j));
      q.col(j) -= proj * q.col(k);
    }
    double norm = q.col(j).norm();
    if (norm <= 0.0 || !std::isfinite(norm))
      fail(errc::hyperbolicity_loss, "QR cocycle column collapsed");
    log_diag[static_cast<std::size_t>(j)].add(std::log(norm));
    q.col(j) /= norm;
  }
}

template <class NextPoint>
LyapunovReport lyapunov_stream(const PerturbedEndo& g, TorusPoint x, std::size_t n,
                               NextPoint&& next_point) {
  int m = g.dim();
  SmallMat q = SmallMat::Identity(m, m);
  std::vector<KahanSum> log_diag(static_cast<std::size_t>(m));
  KahanSum logdet;
  for (std::size_t i = 0; i < n; ++i) {
    SmallMat d = g.derivative_at(x);
    logdet.add(std::log(std::fabs(d.determinant())));
    q = d * q;
    qr_accumulate(q, log_diag);
    x = next_point(i);
  }
  LyapunovReport r;
  r.steps = n;
  r.exponents.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    r.exponents[static_cast<std::size_t>(j)] =
        log_diag[static_cast<std::size_t>(j)].value() / static_cast<double>(n);
  std::sort(r.exponents.begin(), r.exponents.end(), std::greater<>());
  KahanSum sum;
  for (double e : r.exponents) sum.add(e);
  r.sum = sum.value();
  r.mean_log_det = logdet.value() / static_cast<double>(n);
  r.oseledets_defect = std::fabs(r.sum - r.mean_log_det);
  return r;
}

}  // namespace

LyapunovReport lyapunov_forward(const PerturbedEndo& g, const TorusPoint& x0, int transient,
                                std::size_t n) {
  if (n < 1) fail(errc::invalid_input, "lyapunov_forward: orbit too short");
  TorusPoint x = x0;
  for (int i = 0; i < transient; ++i) x = g.apply(x);
  TorusPoint current = x;
  return lyapunov_stream(g, current, n, [&](std::size_t) {
    current = g.apply(current);
    return current;
  });
}

LyapunovReport lyapunov_along(const PerturbedEndo& g, const std::vector<TorusPoint>& orbit) {
  if (orbit.size() < 2) fail(errc::invalid_input, "lyapunov_along: orbit too short");
  std::size_t n = orbit.size() - 1;
  return lyapunov_stream(g, orbit[0], n, [&](std::size_t i) { return orbit[i + 1]; });
}

LyapunovReport lyapunov_backward(const PerturbedEndo& g, const TorusPoint& z,
                                 std::size_t walk_length, StreamRng& rng) {
  Prehistory h = backward_walk(g, z, static_cast<int>(walk_length), rng);
  std::vector<TorusPoint> orbit(h.points.rbegin(), h.points.rend());
  return lyapunov_along(g, orbit);
}

}  // namespace ergolab
