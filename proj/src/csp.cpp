#include "eegdgr/csp.hpp"

#include <cmath>

namespace eegdgr::csp {

namespace {

constexpr double kSpanTolerance = 1e-8;

}  // namespace

linalg::SymMatrix normalized_cov(const Matrix& epoch) {
  if (!epoch.allFinite()) throw CspError("epoch contains non-finite values");
  const Matrix c = epoch * epoch.transpose();
  const double tr = c.trace();
  if (!(tr > 0.0)) throw CspError("epoch has zero energy (trace of E E^T is 0)");
  return linalg::SymMatrix(c / tr);
}

std::vector<linalg::SymMatrix> class_mean_covs(const std::vector<Epoch>& epochs, int num_classes) {
  if (num_classes < 1) throw CspError("need at least one class");
  if (epochs.empty()) throw CspError("no epochs");
  const Eigen::Index m = epochs.front().data.rows();
  std::vector<Matrix> sums(static_cast<std::size_t>(num_classes), Matrix::Zero(m, m));
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (const auto& ep : epochs) {
    if (ep.label < 1 || ep.label > num_classes) {
      throw CspError("epoch label " + std::to_string(ep.label) + " outside 1.." + std::to_string(num_classes));
    }
    if (ep.data.rows() != m) throw CspError("epochs disagree on channel count");
    const auto k = static_cast<std::size_t>(ep.label - 1);
    sums[k] += normalized_cov(ep.data).matrix();
    ++counts[k];
  }
  std::vector<linalg::SymMatrix> out;
  out.reserve(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) {
    if (counts[k] == 0) throw CspError("class " + std::to_string(k + 1) + " has no epochs");
    out.emplace_back(sums[k] / static_cast<double>(counts[k]));
  }
  return out;
}

CspModel fit_csp(const std::vector<Epoch>& epochs, int num_classes, CspFitDetail* detail) {
  const auto means = class_mean_covs(epochs, num_classes);
  const Eigen::Index m = means.front().order();

  Matrix composite = Matrix::Zero(m, m);
  for (const auto& c : means) composite += c.matrix();

  Matrix p;
  try {
    p = linalg::whitening(linalg::SymMatrix(composite));
  } catch (const linalg::RankDeficientError& e) {
    throw CspError(std::string(e.what()) + " (composite covariance is rank deficient: too few/too short epochs)");
  }

  std::vector<Matrix> whitened;
  whitened.reserve(means.size());
  for (const auto& c : means) {
    Matrix s = p * c.matrix() * p.transpose();
    whitened.push_back(0.5 * (s + s.transpose()));
  }

  std::vector<linalg::EigenPair> problems;
  for (std::size_t i = 0; i < whitened.size(); ++i) {
    if (whitened.size() == 1) {
      problems.push_back(linalg::sym_eig(linalg::SymMatrix(whitened[i])));
      continue;
    }
    Matrix rest = Matrix::Zero(m, m);
    for (std::size_t j = 0; j < whitened.size(); ++j) {
      if (j != i) rest += whitened[j];
    }
    try {
      problems.push_back(linalg::gen_eig_sym(linalg::SymMatrix(whitened[i]), linalg::SymMatrix(rest)));
    } catch (const linalg::RankDeficientError& e) {
      throw CspError("class " + std::to_string(i + 1) + " vs rest: " + e.what() +
                     " (too few/too short epochs)");
    }
  }

  CspModel model;
  model.num_channels = static_cast<int>(m);
  model.w.resize(m, m);
  for (int k = 1; k <= num_classes; ++k) model.class_order.push_back(k);
  for (const auto& pr : problems) model.per_class_eigvals.push_back(pr.values);

  // Orthonormal basis of the selected directions in the whitened space.
  Matrix basis(m, m);
  Eigen::Index selected = 0;
  std::vector<Eigen::Index> next(problems.size(), 0);
  bool progressed = true;
  while (selected < m && progressed) {
    progressed = false;
    for (std::size_t i = 0; i < problems.size() && selected < m; ++i) {
      while (next[i] < m) {
        Vector v = problems[i].vectors.col(next[i]++);
        v.normalize();
        progressed = true;
        Vector residual = v;
        if (selected > 0) {
          const auto q = basis.leftCols(selected);
          const Vector coeff = q.transpose() * v;
          if (coeff.norm() > 1.0 - kSpanTolerance) continue;
          residual -= q * coeff;
        }
        basis.col(selected) = residual.normalized();
        Vector row = p.transpose() * v;
        linalg::fix_sign(row);
        model.w.row(selected) = row.transpose();
        ++selected;
        break;
      }
    }
  }
  if (selected < m) {
    throw CspError("could not assemble a full-rank filter bank (" + std::to_string(selected) + " of " +
                   std::to_string(m) + " rows)");
  }

  if (detail) {
    detail->whitening = p;
    detail->whitened = std::move(whitened);
    detail->problems = std::move(problems);
  }
  return model;
}

Matrix apply_csp(const CspModel& model, const Matrix& epoch) {
  if (epoch.rows() != model.num_channels) {
    throw CspError("CSP model expects " + std::to_string(model.num_channels) + " channels, got " +
                   std::to_string(epoch.rows()));
  }
  return model.w * epoch;
}

Epoch apply_csp(const CspModel& model, const Epoch& epoch) {
  Epoch out = epoch;
  out.data = apply_csp(model, epoch.data);
  return out;
}

}  // namespace eegdgr::csp
