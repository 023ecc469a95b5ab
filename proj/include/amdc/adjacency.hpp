#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amdc/types.hpp"

namespace amdc {

/// m x m transition-count matrix of one sequence. Entry (u, v) counts the
/// positions where state u immediately precedes state v; the diagonal counts
/// contiguous time spent in a state. All entries sum to l - 1.
struct AdjacencyMatrix {
  Eigen::MatrixXd entries;
  int l = 0;
  bool weighted = false;
};

/// Per-transition weights; w[j] applies to the transition from position j to
/// j + 1, so the length is l - 1. All weights must be positive.
struct WeightVector {
  std::vector<double> w;
};

/// Clock-time window carrying a relative weight, minutes from local
/// midnight, [start, end). start >= end wraps across midnight.
struct WeightWindow {
  int start_minute = 0;
  int end_minute = 0;
  double relative_weight = 1.0;
};

/// Parses "HH:MM-HH:MM".
WeightWindow parse_weight_window(const std::string& window, double relative_weight);

/// Expands clock-time windows into a per-transition weight vector. A
/// transition is weighted by the window containing its source position's
/// clock time, taken modulo 24 h so windows apply to each day of a
/// concatenated week. Unlisted times get weight 1; overlapping windows are
/// an error.
WeightVector window_weights(std::span<const WeightWindow> windows, int l, int delta_minutes);

AdjacencyMatrix build_adjacency(const Sequence& seq, int m);

/// Weighted transition counts, rescaled so the entries again sum to l - 1.
/// A uniform weight vector reproduces build_adjacency bit for bit.
AdjacencyMatrix build_weighted_adjacency(const Sequence& seq, const WeightVector& weights, int m);

/// Row-major vectorization: row u of the matrix occupies vector positions
/// u*m ... u*m + m - 1. The contribution diagnostic labels its rows through
/// this mapping.
Eigen::VectorXd vec_rowmajor(const Eigen::MatrixXd& entries);
Eigen::MatrixXd unvec_rowmajor(const Eigen::VectorXd& column, int m);

/// "from->to" label for each vectorized adjacency entry, in vec order.
std::vector<std::string> vec_entry_labels(const Alphabet& alphabet);

/// m^2 x n matrix whose column i is vec of sequence i's adjacency matrix.
struct DataMatrix {
  Eigen::MatrixXd M;
  bool centered = false;
  int l = 0;
  int m = 0;
  int n = 0;
};

DataMatrix assemble(const SequenceSet& set,
                    const std::optional<WeightVector>& weights = std::nullopt, int threads = 0);

/// Subtracts the constant (l - 1) / m^2 from every entry, making all column
/// sums zero. Centering twice is an error.
DataMatrix center(const DataMatrix& dm);

}  // namespace amdc
