#include "eegdgr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace eegdgr::linalg {

namespace {

constexpr int kMaxSweeps = 100;

std::string rank_message(std::size_t index, double value, double floor) {
  std::ostringstream os;
  os << "matrix is not positive definite: eigenvalue #" << index << " = " << value
     << " is at or below the floor " << floor;
  return os.str();
}

// Rotates columns p and q of m by (c, s).
void rotate_cols(Matrix& m, Eigen::Index p, Eigen::Index q, double c, double s) {
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const double mp = m(k, p);
    const double mq = m(k, q);
    m(k, p) = c * mp - s * mq;
    m(k, q) = s * mp + c * mq;
  }
}

void rotate_rows(Matrix& m, Eigen::Index p, Eigen::Index q, double c, double s) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    const double mp = m(p, k);
    const double mq = m(q, k);
    m(p, k) = c * mp - s * mq;
    m(q, k) = s * mp + c * mq;
  }
}

double off_diagonal_sq(const Matrix& a) {
  double off = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) off += a(i, j) * a(i, j);
  }
  return off;
}

}  // namespace

RankDeficientError::RankDeficientError(std::size_t index, double value, double floor)
    : NumericError(rank_message(index, value, floor)), index_(index), value_(value), floor_(floor) {}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw NumericError("symmetric matrix must be square and non-empty, got " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  double scale = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        throw NumericError("non-finite entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      scale = std::max(scale, std::abs(m(i, j)));
    }
  }
  const double tol = kSymmetryTol * std::max(1.0, scale);
  double worst = 0.0;
  Eigen::Index wi = 0, wj = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double d = std::abs(m(i, j) - m(j, i));
      if (d > worst) {
        worst = d;
        wi = i;
        wj = j;
      }
    }
  }
  if (worst > tol) {
    std::ostringstream os;
    os << "matrix is not symmetric: worst pair (" << wi << "," << wj << ") differs by " << worst
       << " (tolerance " << tol << ")";
    throw NumericError(os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index order) { return SymMatrix(Matrix::Identity(order, order)); }

SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

void fix_sign(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    if (std::abs(v[k]) > std::abs(v[best])) best = k;
  }
  if (v[best] < 0.0) v = -v;
}

EigenPair sym_eig(const SymMatrix& c) {
  const Eigen::Index n = c.order();
  Matrix a = c.matrix();
  Matrix v = Matrix::Identity(n, n);

  const double norm_sq = a.squaredNorm();
  const double target = norm_sq * 1e-30;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_sq(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Past the first sweeps, an entry too small to change either diagonal
        // element is dropped outright.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) && std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        rotate_cols(a, p, q, cs, sn);
        rotate_rows(a, p, q, cs, sn);
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        rotate_cols(v, p, q, cs, sn);
      }
    }
  }
  if (sweep == kMaxSweeps && off_diagonal_sq(a) > target) {
    throw NumericError("Jacobi eigensolver did not converge in " + std::to_string(kMaxSweeps) + " sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

  EigenPair out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = a(src, src);
    Vector col = v.col(src);
    col.normalize();
    fix_sign(col);
    out.vectors.col(k) = col;
  }
  return out;
}

Matrix whitening(const SymMatrix& c_bar) {
  const EigenPair eig = sym_eig(c_bar);
  const Eigen::Index n = eig.values.size();
  const double largest = eig.values[0];
  const double floor = kRankFloor * std::max(largest, 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(eig.values[k] > floor)) {
      throw RankDeficientError(static_cast<std::size_t>(k), eig.values[k], floor);
    }
  }
  Matrix p(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    p.row(k) = eig.vectors.col(k).transpose() / std::sqrt(eig.values[k]);
  }
  return p;
}

EigenPair gen_eig_sym(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) {
    throw NumericError("generalized eigenproblem order mismatch: " + std::to_string(a.order()) + " vs " +
                       std::to_string(b.order()));
  }
  const Matrix p = whitening(b);
  const Matrix transformed = p * a.matrix() * p.transpose();
  const EigenPair inner = sym_eig(SymMatrix(0.5 * (transformed + transformed.transpose())));
  EigenPair out{inner.values, p.transpose() * inner.vectors};
  for (Eigen::Index k = 0; k < out.vectors.cols(); ++k) {
    Vector col = out.vectors.col(k);
    fix_sign(col);
    out.vectors.col(k) = col;
  }
  return out;
}

}  // namespace eegdgr::linalg
