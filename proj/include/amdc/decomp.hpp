#pragma once

#include <Eigen/Dense>
#include <vector>

#include "amdc/adjacency.hpp"

namespace amdc {

/// Thin SVD of the centered data matrix: M_c = U * diag(S) * V^T with
/// r = min(m^2, n). Signs follow a fixed convention: each pair (u_k, v_k) is
/// flipped so the largest-magnitude entry of u_k is positive (ties to the
/// lowest index), making the factors reproducible across runs.
struct SvdFactors {
  Eigen::MatrixXd U;  // m^2 x r, orthonormal columns
  Eigen::VectorXd S;  // r, nonincreasing, nonnegative
  Eigen::MatrixXd V;  // n x r, orthonormal columns
  /// Number of singular values above the numerical-rank threshold; V columns
  /// past this are noise directions and are never offered for embedding.
  int rank = 0;
};

SvdFactors decompose(const DataMatrix& centered);

/// Thin SVD with the deterministic sign convention, for any real matrix
/// (also used on the small per-cluster mean matrices inside the evaluation
/// metric).
SvdFactors svd_signed(const Eigen::MatrixXd& A);

/// First h columns of V; row i holds sequence i's coordinates.
Eigen::MatrixXd embed(const SvdFactors& f, int h);

/// Maps one centered adjacency column into the h-dimensional embedding of an
/// existing decomposition: t^T * U_h * diag(S_h)^-1. Used to place sequences
/// that were not part of the fitted matrix.
Eigen::VectorXd project(const SvdFactors& f, const Eigen::VectorXd& centered_column, int h);

/// Percent contribution of each adjacency entry (vec order) to each singular
/// direction: C = (M_c V)^(hadamard 2) * 100 / S^2. Columns of near-zero
/// singular value are dropped; `columns` records the surviving direction
/// indices (0-based).
struct ContributionMatrix {
  Eigen::MatrixXd C;         // m^2 x |columns|, each column sums to 100
  std::vector<int> columns;
};

ContributionMatrix contributions(const DataMatrix& centered, const SvdFactors& f);

}  // namespace amdc
