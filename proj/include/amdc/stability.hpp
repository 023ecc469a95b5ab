#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "amdc/cluster.hpp"
#include "amdc/types.hpp"

namespace amdc {

struct BootstrapResult {
  /// Per successful replicate: cluster labels for every ORIGINAL sequence,
  /// obtained by projecting it onto the replicate's embedding and taking the
  /// nearest replicate center.
  std::vector<std::vector<int>> partitions;
  std::vector<int> selected_p;  // the replicate fits' own choices
  int failures = 0;
};

/// Two-stage bootstrap: sample groups with replacement, then sequences
/// within each sampled group with replacement up to that group's original
/// count; refit on the replicate with the same grids and fit seed, then
/// carry the replicate's centers back to the original data. Resampling
/// randomness derives from `seed`; replicate fits reuse `options.seed` so a
/// replicate that reproduces the original data reproduces the reference
/// model exactly.
BootstrapResult bootstrap_partitions(const SequenceSet& set, const FitOptions& options, int B,
                                     std::uint64_t seed);

struct StabilityReport {
  std::vector<double> scores;          // per original sequence, in [0, 1]
  std::vector<double> cluster_mean;    // by reference cluster
  std::vector<double> cluster_median;
  double overall_mean = 0.0;
  double overall_median = 0.0;
  std::map<int, int> p_counts;  // replicate-selected cluster counts
  int B = 0;                    // replicates scored
  int failures = 0;
};

/// Per-observation agreement between the reference partition and each
/// replicate partition: the Jaccard overlap of the observation's co-cluster
/// sets (score 1 when both sets are empty), averaged over replicates.
StabilityReport stability_scores(const std::vector<int>& reference,
                                 const std::vector<std::vector<int>>& partitions);

/// stability_scores plus the bootstrap-side bookkeeping (selected-p
/// distribution, failure count).
StabilityReport stability_report(const std::vector<int>& reference,
                                 const BootstrapResult& bootstrap);

}  // namespace amdc
