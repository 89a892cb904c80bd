#pragma once

#include "eegdgr/linalg.hpp"

#include <stdexcept>

namespace eegdgr::dgr {

class DgrError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Learnable channel graph: symmetric with zero diagonal. The only way to
// build one from arbitrary values is project_adjacency.
class Adjacency {
 public:
  explicit Adjacency(Eigen::Index order = 0) : a_(Matrix::Zero(order, order)) {}

  Eigen::Index order() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }

  friend Adjacency project_adjacency(const Matrix& a_raw);

 private:
  Matrix a_;
};

// (a_raw + a_raw^T) / 2 with the diagonal zeroed.
Adjacency project_adjacency(const Matrix& a_raw);

// (A + I) * e_bar.
Matrix dgr_forward(const Adjacency& adj, const Matrix& e_bar);

struct DgrGrad {
  Matrix grad_adj;    // symmetric, zero diagonal
  Matrix grad_input;  // (A + I)^T * upstream
};

DgrGrad dgr_grad(const Adjacency& adj, const Matrix& e_bar, const Matrix& upstream);

// Projection of a raw M x M gradient onto the constraint set's tangent space.
Matrix project_gradient(const Matrix& g);

}  // namespace eegdgr::dgr
