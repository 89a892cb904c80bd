#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eegdgr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an SPD check fails: some eigenvalue sits at or below
// eps_floor = kRankFloor * (largest eigenvalue).
class RankDeficientError : public NumericError {
 public:
  RankDeficientError(std::size_t index, double value, double floor);

  std::size_t index() const { return index_; }
  double value() const { return value_; }
  double floor() const { return floor_; }

 private:
  std::size_t index_;
  double value_;
  double floor_;
};

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kRankFloor = 1e-10;

// Dense real symmetric matrix. Construction validates finiteness and symmetry
// (relative to the largest entry magnitude) and stores the exactly
// symmetrized average so downstream code never sees drift.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index order);
  static SymMatrix diagonal(const Vector& d);

  Eigen::Index order() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

struct EigenPair {
  Vector values;   // non-increasing
  Matrix vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi eigendecomposition. Columns are unit norm, values sorted
// descending, each column's largest-magnitude component made positive.
EigenPair sym_eig(const SymMatrix& c);

// P with P * c_bar * P^T == I; rows of P are eigenvectors scaled by
// 1/sqrt(lambda). Throws RankDeficientError below the eps floor.
Matrix whitening(const SymMatrix& c_bar);

// Solves a v = lambda b v for SPD b by whitening b and diagonalizing the
// transformed a. Eigenvectors are b-orthonormal.
EigenPair gen_eig_sym(const SymMatrix& a, const SymMatrix& b);

// Applies the sign convention used throughout: the largest-magnitude entry of
// v is made positive (first such entry on ties).
void fix_sign(Eigen::Ref<Vector> v);

}  // namespace linalg
}  // namespace eegdgr
