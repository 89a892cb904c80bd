#include "eegdgr/dgr.hpp"

#include <string>

namespace eegdgr::dgr {

namespace {

void check_shapes(const Adjacency& adj, const Matrix& e_bar) {
  if (adj.order() != e_bar.rows()) {
    throw DgrError("adjacency of order " + std::to_string(adj.order()) + " cannot act on " +
                   std::to_string(e_bar.rows()) + " channels");
  }
}

}  // namespace

Matrix project_gradient(const Matrix& g) {
  if (g.rows() != g.cols()) throw DgrError("adjacency must be square");
  Matrix out = 0.5 * (g + g.transpose());
  out.diagonal().setZero();
  return out;
}

Adjacency project_adjacency(const Matrix& a_raw) {
  Adjacency adj(a_raw.rows());
  adj.a_ = project_gradient(a_raw);
  return adj;
}

Matrix dgr_forward(const Adjacency& adj, const Matrix& e_bar) {
  check_shapes(adj, e_bar);
  return adj.matrix() * e_bar + e_bar;
}

DgrGrad dgr_grad(const Adjacency& adj, const Matrix& e_bar, const Matrix& upstream) {
  check_shapes(adj, e_bar);
  if (upstream.rows() != e_bar.rows() || upstream.cols() != e_bar.cols()) {
    throw DgrError("upstream gradient shape does not match the layer output");
  }
  return {project_gradient(upstream * e_bar.transpose()), adj.matrix().transpose() * upstream + upstream};
}

}  // namespace eegdgr::dgr
