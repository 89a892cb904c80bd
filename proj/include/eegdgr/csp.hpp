#pragma once

#include "eegdgr/linalg.hpp"
#include "eegdgr/pipeline.hpp"

#include <stdexcept>
#include <vector>

namespace eegdgr::csp {

class CspError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spatial filter bank. Rows of w act directly on raw (normalized) epochs.
struct CspModel {
  Matrix w;
  std::vector<int> class_order;
  std::vector<Vector> per_class_eigvals;  // descending, one per class
  int num_channels = 0;
};

// Intermediate quantities of a fit, for inspection and tests.
struct CspFitDetail {
  Matrix whitening;                    // P with P * sum(C_k) * P^T = I
  std::vector<Matrix> whitened;        // S_k = P C_k P^T
  std::vector<linalg::EigenPair> problems;  // S_i v = lambda (sum_{j!=i} S_j) v
};

// E E^T / trace(E E^T).
linalg::SymMatrix normalized_cov(const Matrix& epoch);

// Mean normalized covariance of each class 1..num_classes.
std::vector<linalg::SymMatrix> class_mean_covs(const std::vector<Epoch>& epochs, int num_classes);

// One-vs-rest CSP. Filters are gathered round-robin over classes, best
// eigenvalue first, skipping candidates that are numerically inside the span
// of rows already chosen, until the bank has M rows.
CspModel fit_csp(const std::vector<Epoch>& epochs, int num_classes, CspFitDetail* detail = nullptr);

Matrix apply_csp(const CspModel& model, const Matrix& epoch);
Epoch apply_csp(const CspModel& model, const Epoch& epoch);

}  // namespace eegdgr::csp
