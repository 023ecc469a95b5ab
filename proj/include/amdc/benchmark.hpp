#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "amdc/markov.hpp"

namespace amdc {

/// Best classification agreement over one-to-one relabelings of the
/// predicted clusters (exact permutation search; both partitions must use
/// the same cluster count, at most 8).
double bijective_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

/// What a clustering method hands back to the benchmark harness. The harness
/// scores `at_true_p` against the true labels and tallies `selected_p` from
/// the method's own selection rule.
struct MethodOutput {
  std::vector<int> at_true_p;  // partition with exactly true_p clusters
  int selected_p = 0;
  double prep_seconds = 0.0;  // data preparation only (distances / SVD)
};

struct MethodContext {
  int true_p = 0;
  int restarts = 0;
  std::uint64_t seed = 0;  // per-replicate, derived by the harness
};

/// Adapter for plugging additional clustering methods into the benchmark
/// ("amdc" and "hier" are built in and need no registration).
using ClusteringMethod = std::function<MethodOutput(const SequenceSet&, const MethodContext&)>;

struct BenchmarkConfig {
  std::vector<ScenarioSpec> scenarios;
  std::vector<std::string> methods = {"amdc", "hier"};
  /// Name -> adapter for methods beyond the built-ins; names here may also
  /// shadow a built-in.
  std::map<std::string, ClusteringMethod> extra_methods;
  int replicates = 50;
  int restarts = 10;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// One (scenario, replicate, method) evaluation. `accuracy` is measured on
/// the method's partition at the true cluster count; `selected_p` is what
/// the method's own selection rule picked.
struct ReplicateRecord {
  std::string scenario;
  int replicate = 0;
  std::string method;
  double accuracy = 0.0;
  int selected_p = 0;
  double prep_seconds = 0.0;
  double total_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct MethodAggregate {
  std::string scenario;
  std::string method;
  int replicates = 0;  // successful ones
  double accuracy_mean = 0.0;
  double accuracy_sd = 0.0;
  int mode_selected_p = 0;
  double prep_seconds_mean = 0.0;
  double total_seconds_mean = 0.0;
  int failures = 0;
};

struct BenchmarkResult {
  std::vector<ReplicateRecord> records;     // scenario-major, replicate, method
  std::vector<MethodAggregate> aggregates;  // scenario-major, method order as given
};

/// For every scenario and replicate: draw a dataset from the scenario's
/// Markov mixture, run each requested method, score it against the true
/// labels. Dataset seeds derive from (seed, scenario name, replicate), so
/// results are reproducible and method lists can be changed without
/// perturbing the data. Per-replicate failures are recorded, not fatal.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

}  // namespace amdc
