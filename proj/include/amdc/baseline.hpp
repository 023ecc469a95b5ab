#pragma once

#include <utility>
#include <vector>

#include "amdc/types.hpp"

namespace amdc {

/// Symmetric pairwise distances with zero diagonal, flat row-major storage.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double operator()(int i, int j) const {
    return d_[static_cast<std::size_t>(i) * n_ + j];
  }
  void set(int i, int j, double v) {
    d_[static_cast<std::size_t>(i) * n_ + j] = v;
    d_[static_cast<std::size_t>(j) * n_ + i] = v;
  }

 private:
  int n_ = 0;
  std::vector<double> d_;
};

/// Unit-cost edit distance (insert / delete / substitute), two-row dynamic
/// program. The sequences may differ in length.
int levenshtein(const Sequence& a, const Sequence& b);

DistanceMatrix distance_matrix(const SequenceSet& set, int threads = 0);

/// One agglomeration step: `left` and `right` are cluster ids (the smallest
/// original member index of each cluster), `height` the average-linkage
/// distance at the merge, `size` the merged cluster's member count.
struct MergeRecord {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  std::vector<MergeRecord> merges;  // n - 1 records, nondecreasing height
};

/// Average-linkage (UPGMA) agglomeration via Lance-Williams updates with
/// nearest-neighbour caching. Equal-distance merges pick the
/// lexicographically smallest cluster-id pair.
Dendrogram upgma(const DistanceMatrix& dm);

/// Cluster labels (0..p-1) after merging until p clusters remain; clusters
/// are numbered by their smallest member index.
std::vector<int> hierarchical(const DistanceMatrix& dm, int p);
std::vector<int> cut_dendrogram(const Dendrogram& dendro, int n, int p);

/// Classical Dunn index: minimum between-cluster point distance over the
/// maximum within-cluster diameter. A partition of zero-diameter clusters
/// scores +infinity.
double dunn_index(const DistanceMatrix& dm, const std::vector<int>& assignments);

struct HierFitResult {
  std::vector<int> assignments;
  int p = 0;
  std::vector<std::pair<int, double>> dunn_values;  // (p, Dunn) per grid value
  Dendrogram dendrogram;  // full merge history, reusable for other cuts
  /// All pairwise distances were zero; the partition is arbitrary.
  bool degenerate = false;
  double prep_seconds = 0.0;  // distance-matrix construction
  double total_seconds = 0.0;
};

/// Baseline pipeline: Levenshtein distances, one UPGMA tree, Dunn index per
/// candidate p; returns the cut maximizing Dunn (ties toward smaller p).
HierFitResult hier_fit(const SequenceSet& set, const std::vector<int>& p_grid, int threads = 0);

}  // namespace amdc
