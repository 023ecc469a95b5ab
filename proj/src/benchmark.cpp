#include "amdc/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "amdc/baseline.hpp"
#include "amdc/cluster.hpp"
#include "amdc/parallel.hpp"
#include "amdc/rng.hpp"

namespace amdc {

double bijective_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw std::invalid_argument("label vectors must be nonempty and equally long");
  }
  int p_true = 0, p_pred = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0) throw std::invalid_argument("negative cluster label");
    p_true = std::max(p_true, truth[i] + 1);
    p_pred = std::max(p_pred, predicted[i] + 1);
  }
  if (p_true != p_pred) {
    throw std::invalid_argument("bijective accuracy needs equal cluster counts (" +
                                std::to_string(p_true) + " vs " + std::to_string(p_pred) + ")");
  }
  if (p_true > 8) throw std::invalid_argument("permutation search supports at most 8 clusters");

  // Contingency counts, then the best one-to-one relabeling by exhausting
  // permutations (p! <= 40320).
  std::vector<std::vector<int>> joint(static_cast<std::size_t>(p_true),
                                      std::vector<int>(static_cast<std::size_t>(p_true), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++joint[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  std::vector<int> perm(static_cast<std::size_t>(p_true));
  std::iota(perm.begin(), perm.end(), 0);
  long best = 0;
  do {
    long agree = 0;
    for (int k = 0; k < p_true; ++k) {
      agree += joint[static_cast<std::size_t>(k)][static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
    }
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

namespace {

/// Best grid cell at a fixed cluster count, by the same ordering fit() uses.
const CellResult* best_cell_at_p(const std::vector<CellResult>& cells, int p) {
  const CellResult* best = nullptr;
  for (const CellResult& cell : cells) {
    if (cell.p != p) continue;
    if (!best) {
      best = &cell;
      continue;
    }
    const bool ci = std::isinf(cell.metrics.D), bi = std::isinf(best->metrics.D);
    if (ci != bi) {
      if (ci) best = &cell;
    } else if (ci && bi) {
      if (cell.metrics.d_b > best->metrics.d_b) best = &cell;
    } else if (cell.metrics.D > best->metrics.D) {
      best = &cell;
    }
  }
  return best;
}

MethodOutput amdc_method(const SequenceSet& set, const MethodContext& ctx) {
  FitOptions options;
  options.restarts = ctx.restarts;
  options.seed = ctx.seed;
  options.threads = 1;  // parallelism lives at the replicate level
  const FitResult fr = fit(set, options);
  MethodOutput out;
  out.prep_seconds = fr.prep_seconds;
  out.selected_p = fr.model.p;
  const CellResult* cell = best_cell_at_p(fr.cells, ctx.true_p);
  if (!cell) throw std::runtime_error("grid does not contain the true cluster count");
  out.at_true_p = cell->assignments;
  return out;
}

MethodOutput hier_method(const SequenceSet& set, const MethodContext& ctx) {
  std::vector<int> p_grid;
  for (int p = 2; p <= std::min(10, static_cast<int>(set.size())); ++p) p_grid.push_back(p);
  const HierFitResult hr = hier_fit(set, p_grid, 1);
  MethodOutput out;
  out.prep_seconds = hr.prep_seconds;
  out.selected_p = hr.p;
  out.at_true_p = cut_dendrogram(hr.dendrogram, static_cast<int>(set.size()), ctx.true_p);
  return out;
}

ClusteringMethod resolve_method(const BenchmarkConfig& config, const std::string& name) {
  const auto it = config.extra_methods.find(name);
  if (it != config.extra_methods.end()) return it->second;
  if (name == "amdc") return amdc_method;
  if (name == "hier") return hier_method;
  throw std::invalid_argument("unknown method '" + name + "'");
}

MethodAggregate aggregate(const std::string& scenario, const std::string& method,
                          const std::vector<ReplicateRecord>& records) {
  MethodAggregate agg;
  agg.scenario = scenario;
  agg.method = method;
  std::vector<double> accs;
  std::map<int, int> p_counts;
  for (const ReplicateRecord& rec : records) {
    if (rec.scenario != scenario || rec.method != method) continue;
    if (rec.failed) {
      ++agg.failures;
      continue;
    }
    accs.push_back(rec.accuracy);
    ++p_counts[rec.selected_p];
    agg.prep_seconds_mean += rec.prep_seconds;
    agg.total_seconds_mean += rec.total_seconds;
  }
  agg.replicates = static_cast<int>(accs.size());
  if (accs.empty()) return agg;

  const double n = static_cast<double>(accs.size());
  agg.accuracy_mean = std::accumulate(accs.begin(), accs.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : accs) ss += (a - agg.accuracy_mean) * (a - agg.accuracy_mean);
  agg.accuracy_sd = accs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  agg.prep_seconds_mean /= n;
  agg.total_seconds_mean /= n;
  int best_count = 0;
  for (const auto& [p, count] : p_counts) {
    if (count > best_count) {  // map iterates ascending, ties keep smaller p
      best_count = count;
      agg.mode_selected_p = p;
    }
  }
  return agg;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  if (config.scenarios.empty()) throw std::invalid_argument("no scenarios");
  if (config.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (config.methods.empty()) throw std::invalid_argument("no methods");

  BenchmarkResult result;
  const std::size_t per_scenario = static_cast<std::size_t>(config.replicates) * config.methods.size();
  result.records.resize(config.scenarios.size() * per_scenario);

  // One work item per replicate; records land in fixed slots so aggregation
  // never depends on scheduling.
  parallel_for(config.scenarios.size() * static_cast<std::size_t>(config.replicates),
               [&](std::size_t item) {
    const std::size_t s = item / static_cast<std::size_t>(config.replicates);
    const int rep = static_cast<int>(item % static_cast<std::size_t>(config.replicates));
    const ScenarioSpec& scenario = config.scenarios[s];
    const std::uint64_t data_seed =
        mix_seed(mix_seed(config.seed, fnv1a(scenario.name)), static_cast<std::uint64_t>(rep));

    GeneratedDataset data;
    bool data_ok = true;
    std::string data_error;
    try {
      data = generate_dataset(scenario, data_seed, 1);
    } catch (const std::exception& e) {
      data_ok = false;
      data_error = e.what();
    }

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      ReplicateRecord& rec =
          result.records[s * per_scenario +
                         static_cast<std::size_t>(rep) * config.methods.size() + mi];
      rec.scenario = scenario.name;
      rec.replicate = rep;
      rec.method = config.methods[mi];
      if (!data_ok) {
        rec.failed = true;
        rec.error = data_error;
        continue;
      }
      try {
        const ClusteringMethod method = resolve_method(config, config.methods[mi]);
        MethodContext ctx;
        ctx.true_p = scenario.n_clusters;
        ctx.restarts = config.restarts;
        ctx.seed = mix_seed(data_seed, fnv1a(config.methods[mi]));
        const auto t0 = std::chrono::steady_clock::now();
        MethodOutput out = method(data.set, ctx);
        rec.total_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.prep_seconds = out.prep_seconds;
        rec.selected_p = out.selected_p;
        rec.accuracy = bijective_accuracy(data.labels, out.at_true_p);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  }, config.threads);

  for (const ScenarioSpec& scenario : config.scenarios) {
    for (const std::string& method : config.methods) {
      result.aggregates.push_back(aggregate(scenario.name, method, result.records));
    }
  }
  return result;
}

}  // namespace amdc
