#include "ergolab/torus.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace ergolab {

namespace {

using int128 = __int128;

long long checked_narrow(int128 v, const char* what) {
  if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min()) {
    fail(errc::numerical_error, std::string("integer overflow in ") + what);
  }
  return static_cast<long long>(v);
}

}  // namespace

TorusPoint reduce_mod1(const SmallVec& v) {
  SmallVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double x = v[i];
    if (!std::isfinite(x)) fail(errc::invalid_input, "non-finite coordinate in reduce_mod1");
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0;  // floor rounding can land exactly on 1.0
    if (r < 0.0) r += 1.0;
    out[i] = r;
  }
  return TorusPoint(std::move(out));
}

double torus_distance(const TorusPoint& p, const TorusPoint& q) {
  if (p.dim() != q.dim()) fail(errc::invalid_input, "torus_distance: dimension mismatch");
  // The nearest lattice translate decomposes per axis, so this is exact in
  // every dimension.
  double s = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    double d = std::fabs(p[i] - q[i]);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

IntegerMatrix::IntegerMatrix(int dim) : dim_(dim), e_(static_cast<std::size_t>(dim) * dim, 0) {
  if (dim < 1) fail(errc::invalid_input, "IntegerMatrix: dimension must be positive");
}

IntegerMatrix IntegerMatrix::identity(int dim) {
  IntegerMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1);
  return m;
}

IntegerMatrix IntegerMatrix::from_rows(const std::vector<std::vector<long long>>& rows) {
  int n = static_cast<int>(rows.size());
  IntegerMatrix m(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      fail(errc::invalid_input, "IntegerMatrix: rows must form a square matrix");
    for (int j = 0; j < n; ++j) m.set(i, j, rows[i][j]);
  }
  return m;
}

long long IntegerMatrix::determinant() const {
  // Bareiss fraction-free elimination; exact divisions throughout.
  int n = dim_;
  std::vector<int128> a(e_.begin(), e_.end());
  auto at128 = [&](int i, int j) -> int128& { return a[static_cast<std::size_t>(i) * n + j]; };
  int128 prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (at128(k, k) == 0) {
      int p = -1;
      for (int i = k + 1; i < n; ++i)
        if (at128(i, k) != 0) { p = i; break; }
      if (p < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(at128(k, j), at128(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        at128(i, j) = (at128(i, j) * at128(k, k) - at128(i, k) * at128(k, j)) / prev;
      }
      at128(i, k) = 0;
    }
    prev = at128(k, k);
  }
  return checked_narrow(sign * at128(n - 1, n - 1), "determinant");
}

const std::vector<double>& IntegerMatrix::eigenvalue_moduli() const {
  if (moduli_.empty()) {
    Eigen::MatrixXd m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = static_cast<double>(at(i, j));
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    moduli_.resize(dim_);
    for (int i = 0; i < dim_; ++i) moduli_[i] = std::abs(es.eigenvalues()[i]);
  }
  return moduli_;
}

double IntegerMatrix::hyperbolicity_margin() const {
  double margin = std::numeric_limits<double>::infinity();
  for (double m : eigenvalue_moduli()) margin = std::min(margin, std::fabs(m - 1.0));
  return margin;
}

bool IntegerMatrix::is_hyperbolic(double margin) const {
  if (determinant() == 0) return false;
  for (double m : eigenvalue_moduli())
    if (std::fabs(m - 1.0) < margin || m < margin) return false;
  return true;
}

void IntegerMatrix::require_hyperbolic(double margin) const {
  if (determinant() == 0) fail(errc::validation_error, "matrix is singular");
  for (double m : eigenvalue_moduli()) {
    if (m < margin) fail(errc::validation_error, "matrix has a near-zero eigenvalue");
    if (std::fabs(m - 1.0) < margin)
      fail(errc::validation_error, "matrix has an eigenvalue of modulus 1 (within margin)");
  }
}

IntegerMatrix IntegerMatrix::multiplied(const IntegerMatrix& rhs) const {
  if (dim_ != rhs.dim_) fail(errc::invalid_input, "IntegerMatrix: dimension mismatch");
  IntegerMatrix out(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      int128 s = 0;
      for (int k = 0; k < dim_; ++k) s += static_cast<int128>(at(i, k)) * rhs.at(k, j);
      out.set(i, j, checked_narrow(s, "matrix product"));
    }
  return out;
}

IntegerMatrix IntegerMatrix::power(int n) const {
  if (n < 0) fail(errc::invalid_input, "IntegerMatrix::power: negative exponent");
  IntegerMatrix result = identity(dim_);
  IntegerMatrix base = *this;
  while (n > 0) {
    if (n & 1) result = result.multiplied(base);
    base = base.multiplied(base);
    n >>= 1;
  }
  return result;
}

IntegerMatrix IntegerMatrix::minus_identity() const {
  IntegerMatrix out = *this;
  for (int i = 0; i < dim_; ++i) out.set(i, i, out.at(i, i) - 1);
  return out;
}

SmallMat IntegerMatrix::to_real() const {
  SmallMat m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = static_cast<double>(at(i, j));
  return m;
}

namespace {

struct SnfWork {
  int n;
  std::vector<long long> d, u, v;
  long long& D(int i, int j) { return d[static_cast<std::size_t>(i) * n + j]; }
  long long& U(int i, int j) { return u[static_cast<std::size_t>(i) * n + j]; }
  long long& V(int i, int j) { return v[static_cast<std::size_t>(i) * n + j]; }

  void row_op(int dst, int src, long long q) {  // row_dst -= q * row_src (also on u)
    for (int j = 0; j < n; ++j) {
      D(dst, j) = checked_narrow(static_cast<int128>(D(dst, j)) - static_cast<int128>(q) * D(src, j), "snf");
      U(dst, j) = checked_narrow(static_cast<int128>(U(dst, j)) - static_cast<int128>(q) * U(src, j), "snf");
    }
  }
  void col_op(int dst, int src, long long q) {  // col_dst -= q * col_src (also on v)
    for (int i = 0; i < n; ++i) {
      D(i, dst) = checked_narrow(static_cast<int128>(D(i, dst)) - static_cast<int128>(q) * D(i, src), "snf");
      V(i, dst) = checked_narrow(static_cast<int128>(V(i, dst)) - static_cast<int128>(q) * V(i, src), "snf");
    }
  }
  void swap_rows(int a, int b) {
    for (int j = 0; j < n; ++j) { std::swap(D(a, j), D(b, j)); std::swap(U(a, j), U(b, j)); }
  }
  void swap_cols(int a, int b) {
    for (int i = 0; i < n; ++i) { std::swap(D(i, a), D(i, b)); std::swap(V(i, a), V(i, b)); }
  }
  void negate_row(int a) {
    for (int j = 0; j < n; ++j) { D(a, j) = -D(a, j); U(a, j) = -U(a, j); }
  }
};

}  // namespace

SmithDecomposition smith_normal_form(const IntegerMatrix& m) {
  int n = m.dim();
  SnfWork w{n, {}, {}, {}};
  w.d.assign(static_cast<std::size_t>(n) * n, 0);
  w.u.assign(static_cast<std::size_t>(n) * n, 0);
  w.v.assign(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    w.U(i, i) = 1;
    w.V(i, i) = 1;
    for (int j = 0; j < n; ++j) w.D(i, j) = m.at(i, j);
  }

  for (int t = 0; t < n; ++t) {
    for (;;) {
      // move the smallest nonzero entry of the trailing block to (t, t)
      int pi = -1, pj = -1;
      long long best = 0;
      for (int i = t; i < n; ++i)
        for (int j = t; j < n; ++j) {
          long long a = std::llabs(w.D(i, j));
          if (a != 0 && (pi < 0 || a < best)) { pi = i; pj = j; best = a; }
        }
      if (pi < 0) break;  // trailing block is zero
      if (pi != t) w.swap_rows(pi, t);
      if (pj != t) w.swap_cols(pj, t);

      bool clean = true;
      for (int i = t + 1; i < n; ++i) {
        long long q = w.D(i, t) / w.D(t, t);
        if (q != 0) w.row_op(i, t, q);
        if (w.D(i, t) != 0) clean = false;
      }
      for (int j = t + 1; j < n; ++j) {
        long long q = w.D(t, j) / w.D(t, t);
        if (q != 0) w.col_op(j, t, q);
        if (w.D(t, j) != 0) clean = false;
      }
      if (clean) break;
    }
    if (w.D(t, t) < 0) w.negate_row(t);
  }

  SmithDecomposition out{IntegerMatrix(n), IntegerMatrix(n), IntegerMatrix(n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.u.set(i, j, w.U(i, j));
      out.v.set(i, j, w.V(i, j));
      out.d.set(i, j, w.D(i, j));
    }
  return out;
}

IntegerMatrix unimodular_inverse(const IntegerMatrix& u) {
  long long det = u.determinant();
  if (det != 1 && det != -1) fail(errc::invalid_input, "unimodular_inverse: |det| != 1");
  int n = u.dim();
  IntegerMatrix inv(n);
  // adjugate via cofactors; n <= 4 so this stays cheap and exact
  std::vector<int> rows(n - 1), cols(n - 1);
  auto minor_det = [&](int skip_i, int skip_j) -> long long {
    int r = 0;
    for (int i = 0; i < n; ++i)
      if (i != skip_i) rows[r++] = i;
    int c = 0;
    for (int j = 0; j < n; ++j)
      if (j != skip_j) cols[c++] = j;
    int k = n - 1;
    if (k == 0) return 1;
    IntegerMatrix sub(k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub.set(i, j, u.at(rows[i], cols[j]));
    return sub.determinant();
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      long long cof = minor_det(j, i);
      if ((i + j) % 2 != 0) cof = -cof;
      inv.set(i, j, det * cof);  // det is +-1
    }
  return inv;
}

std::vector<std::vector<long long>> coset_representatives(const IntegerMatrix& a) {
  long long det = a.determinant();
  if (det == 0) fail(errc::invalid_input, "coset_representatives: singular matrix");
  auto snf = smith_normal_form(a);
  IntegerMatrix uinv = unimodular_inverse(snf.u);
  int n = a.dim();
  std::vector<std::uint64_t> diag(n);
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) {
    diag[i] = static_cast<std::uint64_t>(std::llabs(snf.d.at(i, i)));
    total *= diag[i];
  }
  std::vector<std::vector<long long>> reps;
  reps.reserve(total);
  std::vector<long long> j(n, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rem = idx;
    for (int i = n - 1; i >= 0; --i) {
      j[i] = static_cast<long long>(rem % diag[i]);
      rem /= diag[i];
    }
    std::vector<long long> k(n, 0);
    for (int r = 0; r < n; ++r) {
      int128 s = 0;
      for (int cidx = 0; cidx < n; ++cidx) s += static_cast<int128>(uinv.at(r, cidx)) * j[cidx];
      k[r] = checked_narrow(s, "coset representative");
    }
    reps.push_back(std::move(k));
  }
  return reps;
}

LatticePointEnumerator::LatticePointEnumerator(const IntegerMatrix& b) : dim_(b.dim()) {
  long long det = b.determinant();
  if (det == 0)
    fail(errc::degenerate_period,
         "lattice system is singular (an eigenvalue is a root of unity)");
  auto snf = smith_normal_form(b);
  diag_.resize(dim_);
  count_ = 1;
  long long lcm = 1;
  for (int i = 0; i < dim_; ++i) {
    diag_[i] = static_cast<std::uint64_t>(std::llabs(snf.d.at(i, i)));
    count_ *= diag_[i];
    lcm = std::lcm(lcm, static_cast<long long>(diag_[i]));
  }
  denominator_ = lcm;
  if (denominator_ > (1LL << 53))
    fail(errc::numerical_error, "lattice denominator exceeds exact double range");
  // x = V * (j_1/d_1, ..., j_m/d_m) mod 1, with V unimodular: over the common
  // denominator L the k-th numerator is sum_l V[k][l] * (L/d_l) * j_l mod L.
  coef_.assign(static_cast<std::size_t>(dim_) * dim_, 0);
  for (int k = 0; k < dim_; ++k)
    for (int l = 0; l < dim_; ++l) {
      long long scale = denominator_ / static_cast<long long>(diag_[l]);
      int128 c = static_cast<int128>(snf.v.at(k, l)) * scale % denominator_;
      long long cc = static_cast<long long>(c);
      if (cc < 0) cc += denominator_;
      coef_[static_cast<std::size_t>(k) * dim_ + l] = cc;
    }
}

TorusPoint LatticePointEnumerator::point(std::uint64_t index) const {
  SmallVec x(dim_);
  std::uint64_t rem = index;
  // mixed-radix digits of the index over (d_1, ..., d_m)
  long long j[4];
  for (int i = dim_ - 1; i >= 0; --i) {
    j[i] = static_cast<long long>(rem % diag_[i]);
    rem /= diag_[i];
  }
  for (int k = 0; k < dim_; ++k) {
    int128 num = 0;
    for (int l = 0; l < dim_; ++l)
      num += static_cast<int128>(coef_[static_cast<std::size_t>(k) * dim_ + l]) * j[l];
    long long n = static_cast<long long>(num % denominator_);
    x[k] = static_cast<double>(n) / static_cast<double>(denominator_);
  }
  return TorusPoint(std::move(x));
}

std::vector<TorusPoint> periodic_lattice_points(const IntegerMatrix& b) {
  LatticePointEnumerator en(b);
  std::vector<TorusPoint> pts;
  pts.reserve(en.count());
  for (std::uint64_t i = 0; i < en.count(); ++i) pts.push_back(en.point(i));
  return pts;
}

}  // namespace ergolab
