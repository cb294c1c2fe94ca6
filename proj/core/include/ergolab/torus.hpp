#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ergolab/errors.hpp"

namespace ergolab {

// All systems live on the m-torus with 2 <= m <= 4; fixed-capacity Eigen
// types keep the hot paths free of heap traffic.
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;

// A point of the m-torus; every coordinate lies in [0,1).
struct TorusPoint {
  SmallVec c;

  TorusPoint() = default;
  explicit TorusPoint(SmallVec coords) : c(std::move(coords)) {}
  int dim() const { return static_cast<int>(c.size()); }
  double operator[](int i) const { return c[i]; }
};

// Coordinate-wise x - floor(x); rejects non-finite input.
TorusPoint reduce_mod1(const SmallVec& v);

// Geodesic (wrap-around) Euclidean distance on the torus.
double torus_distance(const TorusPoint& p, const TorusPoint& q);

// Square integer matrix with exact arithmetic for determinants and lattice
// work. Eigenvalue moduli are cached at construction.
class IntegerMatrix {
 public:
  explicit IntegerMatrix(int dim);
  static IntegerMatrix identity(int dim);
  static IntegerMatrix from_rows(const std::vector<std::vector<long long>>& rows);

  int dim() const { return dim_; }
  long long at(int i, int j) const { return e_[static_cast<std::size_t>(i) * dim_ + j]; }
  void set(int i, int j, long long v) { e_[static_cast<std::size_t>(i) * dim_ + j] = v; }

  long long determinant() const;  // exact (Bareiss, 128-bit intermediates)
  const std::vector<double>& eigenvalue_moduli() const;
  // min over eigenvalues of | |lambda| - 1 |
  double hyperbolicity_margin() const;
  bool is_hyperbolic(double margin = 1e-9) const;
  void require_hyperbolic(double margin = 1e-9) const;  // throws validation_error

  IntegerMatrix multiplied(const IntegerMatrix& rhs) const;
  IntegerMatrix power(int n) const;
  IntegerMatrix minus_identity() const;
  SmallMat to_real() const;

  bool operator==(const IntegerMatrix& rhs) const { return dim_ == rhs.dim_ && e_ == rhs.e_; }

 private:
  int dim_;
  std::vector<long long> e_;
  mutable std::vector<double> moduli_;  // computed lazily
};

// Smith-style diagonalization over the integers: u * m * v = d with u, v
// unimodular and d diagonal (diagonal entries positive, no divisibility
// normalization). Exact; throws numerical_error on int64 overflow.
struct SmithDecomposition {
  IntegerMatrix u;
  IntegerMatrix v;
  IntegerMatrix d;
};
SmithDecomposition smith_normal_form(const IntegerMatrix& m);

// Exact inverse of a unimodular integer matrix (|det| = 1).
IntegerMatrix unimodular_inverse(const IntegerMatrix& u);

// A transversal of Z^m / A Z^m: exactly |det A| integer vectors, pairwise
// inequivalent modulo the column lattice of A. The preimages of y under
// x -> Ax (mod 1) are reduce_mod1(A^{-1}(y + k)) over the returned k.
std::vector<std::vector<long long>> coset_representatives(const IntegerMatrix& a);

// Exact rational enumeration of { x in [0,1)^m : Bx in Z^m }. Indexable so
// huge solution sets can be streamed and chunked without materialization.
class LatticePointEnumerator {
 public:
  explicit LatticePointEnumerator(const IntegerMatrix& b);  // degenerate_period if det = 0
  std::uint64_t count() const { return count_; }
  TorusPoint point(std::uint64_t index) const;

 private:
  int dim_;
  std::uint64_t count_;
  std::vector<std::uint64_t> diag_;     // |d_i|
  std::vector<long long> coef_;         // row-major: coef[k][l] = V[k][l] * (L / d_l) mod L
  long long denominator_;               // L = lcm of diag
};

// Materialized version of the enumerator (small counts only).
std::vector<TorusPoint> periodic_lattice_points(const IntegerMatrix& b);

}  // namespace ergolab
