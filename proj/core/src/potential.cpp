#include "ergolab/potential.hpp"

#include <Eigen/SVD>
#include <bit>
#include <cmath>

#include "ergolab/stats.hpp"

namespace ergolab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

SmallMat generic_frame(int dim, int cols) {
  SmallMat f(dim, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < dim; ++i)
      f(i, j) = std::pow(0.37, (i + j) % dim) + (i == j ? 0.5 : 0.0);
  }
  return f;
}

// In-place Gram-Schmidt; returns the sum of log column scales (the log volume
// expansion of whatever produced the columns).
double orthonormalize(SmallMat& f) {
  double logvol = 0.0;
  for (int j = 0; j < f.cols(); ++j) {
    for (int k = 0; k < j; ++k) f.col(j) -= f.col(k).dot(f.col(j)) * f.col(k);
    double n = f.col(j).norm();
    if (!(n > 0.0) || !std::isfinite(n))
      fail(errc::hyperbolicity_loss, "frame column collapsed during orthonormalization");
    logvol += std::log(n);
    f.col(j) /= n;
  }
  return logvol;
}

std::uint64_t point_key(const TorusPoint& x) {
  std::uint64_t h = mix64(stream_salt::point_keyed);
  for (int i = 0; i < x.dim(); ++i) h = mix64(h ^ std::bit_cast<std::uint64_t>(x[i]));
  return h;
}

}  // namespace

int stable_dimension(const PerturbedEndo& g) {
  int k = 0;
  for (double m : g.linear().eigenvalue_moduli())
    if (m < 1.0) ++k;
  return k;
}

SmallMat stable_frame(const PerturbedEndo& g, const TorusPoint& x, int depth) {
  int k = stable_dimension(g);
  if (k == 0) fail(errc::hyperbolicity_loss, "map has no contracting directions");
  if (depth < 1) fail(errc::invalid_input, "stable_frame: depth must be >= 1");
  SmallMat prod = SmallMat::Identity(g.dim(), g.dim());
  TorusPoint p = x;
  for (int i = 0; i < depth; ++i) {
    prod = g.derivative_at(p) * prod;
    p = g.apply(p);
    double scale = prod.cwiseAbs().maxCoeff();
    if (scale > 1e100) prod /= scale;
  }
  Eigen::MatrixXd m = prod;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  double smin = svd.singularValues().tail(1)[0];
  double smax = svd.singularValues()[0];
  if (!(smax > 0.0) || smin <= 0.0 || smax / smin < 1.0 + 1e-6)
    fail(errc::hyperbolicity_loss, "cocycle product has no singular-value gap");
  SmallMat out(g.dim(), k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < g.dim(); ++i) out(i, j) = svd.matrixV()(i, g.dim() - k + j);
  return out;
}

SmallMat unstable_frame(const PerturbedEndo& g, const Prehistory& h, int depth) {
  int k = g.dim() - stable_dimension(g);
  if (k == 0) fail(errc::hyperbolicity_loss, "map has no expanding directions");
  if (h.depth() < 1) fail(errc::invalid_input, "unstable_frame: empty prehistory");
  int steps = std::min(depth, h.depth());
  SmallMat f = generic_frame(g.dim(), k);
  orthonormalize(f);
  for (int i = steps; i >= 1; --i) {
    f = g.derivative_at(h.points[static_cast<std::size_t>(i)]) * f;
    orthonormalize(f);
  }
  return f;
}

double log_volume_expansion(const PerturbedEndo& g, const TorusPoint& x, const SmallMat& frame) {
  SmallMat image = g.derivative_at(x) * frame;
  return orthonormalize(image);
}

Potential Potential::zero() { return Potential(Kind::zero, {}, 0); }

Potential Potential::trig_poly(std::vector<TrigObsTerm> terms) {
  return Potential(Kind::trig_poly, std::move(terms), 0);
}

Potential Potential::log_abs_det() { return Potential(Kind::log_abs_det, {}, 0); }

Potential Potential::stable_log_det(int depth) {
  return Potential(Kind::stable_log_det, {}, depth);
}

Potential Potential::unstable_neg_log_det(int depth) {
  return Potential(Kind::unstable_neg_log_det, {}, depth);
}

Potential Potential::shifted(double c) const {
  Potential p = *this;
  p.offset_ += c;
  return p;
}

double Potential::eval(const PerturbedEndo& g, const TorusPoint& x) const {
  switch (kind_) {
    case Kind::zero:
      return offset_;
    case Kind::trig_poly: {
      double s = offset_;
      for (const auto& t : terms_) {
        double arg = 0.0;
        for (std::size_t i = 0; i < t.frequency.size(); ++i)
          arg += static_cast<double>(t.frequency[i]) * x[static_cast<int>(i)];
        arg = kTwoPi * arg + t.phase;
        s += t.amplitude * (t.is_cos ? std::cos(arg) : std::sin(arg));
      }
      return s;
    }
    case Kind::log_abs_det:
      return g.log_abs_det(x) + offset_;
    case Kind::stable_log_det:
      return log_volume_expansion(g, x, stable_frame(g, x, depth_)) + offset_;
    case Kind::unstable_neg_log_det: {
      // realize the prehistory by a backward walk keyed to the point
      StreamRng rng(point_key(x), stream_salt::point_keyed);
      Prehistory h = backward_walk(g, x, depth_, rng);
      return -log_volume_expansion(g, x, unstable_frame(g, h, depth_)) + offset_;
    }
  }
  fail(errc::invalid_input, "unknown potential kind");
}

double birkhoff_sum(const PerturbedEndo& g, const Potential& phi, const TorusPoint& x, int n) {
  if (n < 1) fail(errc::invalid_input, "birkhoff_sum: n must be >= 1");
  KahanSum s;
  TorusPoint p = x;
  for (int i = 0; i < n; ++i) {
    s.add(phi.eval(g, p));
    p = g.apply(p);
  }
  return s.value();
}

namespace {

// Pull a converged stable frame down a preimage path: E^s(x) = Dg(x)^{-1} E^s(g x).
double stable_path_sum(const PerturbedEndo& g, const Potential& phi,
                       const std::vector<TorusPoint>& path) {
  SmallMat frame = stable_frame(g, path.front(), phi.depth());
  KahanSum s;
  for (std::size_t j = 1; j < path.size(); ++j) {
    SmallMat d = g.derivative_at(path[j]);
    SmallMat pulled = d.partialPivLu().solve(frame);
    orthonormalize(pulled);
    frame = pulled;
    s.add(log_volume_expansion(g, path[j], frame) + phi.offset());
  }
  return s.value();
}

// Push a generic unstable frame up a preimage path, evaluating before each push.
double unstable_path_sum(const PerturbedEndo& g, const Potential& phi,
                         const std::vector<TorusPoint>& path) {
  int k = g.dim() - stable_dimension(g);
  if (k == 0) fail(errc::hyperbolicity_loss, "map has no expanding directions");
  SmallMat frame = generic_frame(g.dim(), k);
  orthonormalize(frame);
  std::size_t n = path.size() - 1;
  KahanSum s;
  for (std::size_t j = n; j >= 1; --j) {
    s.add(-log_volume_expansion(g, path[j], frame) + phi.offset());
    frame = g.derivative_at(path[j]) * frame;
    orthonormalize(frame);
  }
  return s.value();
}

}  // namespace

double birkhoff_path_sum(const PerturbedEndo& g, const Potential& phi,
                         const std::vector<TorusPoint>& path) {
  if (path.size() < 2) fail(errc::invalid_input, "birkhoff_path_sum: path too short");
  switch (phi.kind()) {
    case Potential::Kind::stable_log_det:
      return stable_path_sum(g, phi, path);
    case Potential::Kind::unstable_neg_log_det:
      return unstable_path_sum(g, phi, path);
    default: {
      KahanSum s;
      for (std::size_t j = 1; j < path.size(); ++j) s.add(phi.eval(g, path[j]));
      return s.value();
    }
  }
}

namespace {

double stable_cycle_sum(const PerturbedEndo& g, const Potential& phi,
                        const std::vector<TorusPoint>& cycle) {
  int n = static_cast<int>(cycle.size());
  int loops = phi.depth() / n + 2;
  SmallMat frame = generic_frame(g.dim(), stable_dimension(g));
  orthonormalize(frame);
  // pulling back grows the stable component; loop until converged
  for (int l = 0; l < loops; ++l) {
    for (int j = n - 1; j >= 0; --j) {
      SmallMat d = g.derivative_at(cycle[static_cast<std::size_t>(j)]);
      SmallMat pulled = d.partialPivLu().solve(frame);
      orthonormalize(pulled);
      frame = pulled;
    }
  }
  // frame now sits at cycle[0]; record one loop, pushing the frame forward
  KahanSum s;
  for (int j = 0; j < n; ++j) {
    s.add(log_volume_expansion(g, cycle[static_cast<std::size_t>(j)], frame) + phi.offset());
    frame = g.derivative_at(cycle[static_cast<std::size_t>(j)]) * frame;
    orthonormalize(frame);
  }
  return s.value();
}

double unstable_cycle_sum(const PerturbedEndo& g, const Potential& phi,
                          const std::vector<TorusPoint>& cycle) {
  int n = static_cast<int>(cycle.size());
  int k = g.dim() - stable_dimension(g);
  if (k == 0) fail(errc::hyperbolicity_loss, "map has no expanding directions");
  int loops = phi.depth() / n + 2;
  SmallMat frame = generic_frame(g.dim(), k);
  orthonormalize(frame);
  for (int l = 0; l < loops; ++l) {
    for (int j = 0; j < n; ++j) {
      frame = g.derivative_at(cycle[static_cast<std::size_t>(j)]) * frame;
      orthonormalize(frame);
    }
  }
  KahanSum s;
  for (int j = 0; j < n; ++j) {
    s.add(-log_volume_expansion(g, cycle[static_cast<std::size_t>(j)], frame) + phi.offset());
    frame = g.derivative_at(cycle[static_cast<std::size_t>(j)]) * frame;
    orthonormalize(frame);
  }
  return s.value();
}

}  // namespace

double birkhoff_cycle_sum(const PerturbedEndo& g, const Potential& phi,
                          const std::vector<TorusPoint>& cycle) {
  if (cycle.empty()) fail(errc::invalid_input, "birkhoff_cycle_sum: empty cycle");
  switch (phi.kind()) {
    case Potential::Kind::stable_log_det:
      return stable_cycle_sum(g, phi, cycle);
    case Potential::Kind::unstable_neg_log_det:
      return unstable_cycle_sum(g, phi, cycle);
    default: {
      KahanSum s;
      for (const auto& p : cycle) s.add(phi.eval(g, p));
      return s.value();
    }
  }
}

}  // namespace ergolab
