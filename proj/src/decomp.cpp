#include "amdc/decomp.hpp"

#include <Eigen/SVD>
#include <limits>
#include <stdexcept>

namespace amdc {

SvdFactors decompose(const DataMatrix& centered) {
  if (!centered.centered) throw std::invalid_argument("decompose requires a centered matrix");
  return svd_signed(centered.M);
}

SvdFactors svd_signed(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw std::runtime_error("SVD failed to converge (matrix " + std::to_string(A.rows()) + "x" +
                             std::to_string(A.cols()) + ", norm " + std::to_string(A.norm()) +
                             ")");
  }

  SvdFactors f;
  f.U = svd.matrixU();
  f.S = svd.singularValues();
  f.V = svd.matrixV();

  // Deterministic signs: largest-|.| entry of each u_k made positive, ties
  // to the lowest index.
  for (Eigen::Index k = 0; k < f.U.cols(); ++k) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < f.U.rows(); ++i) {
      const double a = std::abs(f.U(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (f.U(best, k) < 0.0) {
      f.U.col(k) = -f.U.col(k);
      f.V.col(k) = -f.V.col(k);
    }
  }

  const double tol = std::numeric_limits<double>::epsilon() *
                     static_cast<double>(std::max(A.rows(), A.cols())) *
                     (f.S.size() > 0 ? f.S(0) : 0.0);
  f.rank = 0;
  for (Eigen::Index k = 0; k < f.S.size(); ++k) {
    if (f.S(k) > tol) ++f.rank;
  }
  return f;
}

Eigen::MatrixXd embed(const SvdFactors& f, int h) {
  if (h < 1 || h > f.V.cols()) {
    throw std::invalid_argument("embedding dimension h=" + std::to_string(h) +
                                " outside [1, " + std::to_string(f.V.cols()) + "]");
  }
  return f.V.leftCols(h);
}

Eigen::VectorXd project(const SvdFactors& f, const Eigen::VectorXd& centered_column, int h) {
  if (h < 1 || h > f.rank) {
    throw std::invalid_argument("projection dimension h=" + std::to_string(h) +
                                " outside [1, " + std::to_string(f.rank) + "]");
  }
  if (centered_column.size() != f.U.rows()) {
    throw std::invalid_argument("column length does not match decomposition");
  }
  return (f.U.leftCols(h).transpose() * centered_column).cwiseQuotient(f.S.head(h));
}

ContributionMatrix contributions(const DataMatrix& centered, const SvdFactors& f) {
  if (!centered.centered) throw std::invalid_argument("contributions require the centered matrix");
  if (centered.M.rows() != f.U.rows() || centered.M.cols() != f.V.rows()) {
    throw std::invalid_argument("factors do not match the data matrix");
  }
  const Eigen::MatrixXd scores = (centered.M * f.V).array().square();

  // Singular values are sorted, so the defined directions are exactly the
  // first `rank` columns; the rest are numerically zero and undefined.
  ContributionMatrix out;
  out.C.resize(centered.M.rows(), f.rank);
  out.columns.reserve(static_cast<std::size_t>(f.rank));
  for (int k = 0; k < f.rank; ++k) {
    out.C.col(k) = scores.col(k) * (100.0 / (f.S(k) * f.S(k)));
    out.columns.push_back(k);
  }
  return out;
}

}  // namespace amdc
