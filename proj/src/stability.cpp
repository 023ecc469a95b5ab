#include "amdc/stability.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "amdc/adjacency.hpp"
#include "amdc/decomp.hpp"
#include "amdc/parallel.hpp"
#include "amdc/rng.hpp"

namespace amdc {

BootstrapResult bootstrap_partitions(const SequenceSet& set, const FitOptions& options, int B,
                                     std::uint64_t seed) {
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  const std::size_t n = set.size();

  // Group membership in first-appearance order.
  std::vector<std::vector<std::size_t>> groups;
  {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = index.try_emplace(set[i].group_id, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  }
  const std::size_t n_groups = groups.size();

  // Original columns, centered, for projecting into each replicate's basis.
  const DataMatrix centered_original = center(assemble(set, options.weights, options.threads));

  struct Slot {
    std::vector<int> labels;
    int p = 0;
    bool ok = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(B));

  parallel_for(static_cast<std::size_t>(B), [&](std::size_t b) {
    Rng rng(mix_seed(seed, b));
    std::vector<Sequence> resampled;
    for (std::size_t t = 0; t < n_groups; ++t) {
      const std::vector<std::size_t>& members =
          groups[static_cast<std::size_t>(rng.next_below(n_groups))];
      for (std::size_t j = 0; j < members.size(); ++j) {
        resampled.push_back(
            set[members[static_cast<std::size_t>(rng.next_below(members.size()))]]);
      }
    }

    try {
      FitOptions replicate_options = options;
      replicate_options.threads = 1;  // replicates already run in parallel
      const SequenceSet replicate_set(set.alphabet(), std::move(resampled));
      const FitResult fr = fit(replicate_set, replicate_options);
      if (fr.model.p < 2) throw std::runtime_error("degenerate replicate fit");

      // Place every original sequence in the replicate's embedding.
      Eigen::MatrixXd points(static_cast<Eigen::Index>(n), fr.model.h);
      for (std::size_t i = 0; i < n; ++i) {
        points.row(static_cast<Eigen::Index>(i)) =
            project(fr.factors, centered_original.M.col(static_cast<Eigen::Index>(i)),
                    fr.model.h);
      }
      Slot& slot = slots[b];
      slot.labels = assign(fr.model, points);
      slot.p = fr.model.p;
      slot.ok = true;
    } catch (const std::exception&) {
      // recorded as a failure below
    }
  }, options.threads);

  BootstrapResult out;
  for (Slot& slot : slots) {
    if (!slot.ok) {
      ++out.failures;
      continue;
    }
    out.partitions.push_back(std::move(slot.labels));
    out.selected_p.push_back(slot.p);
  }
  return out;
}

StabilityReport stability_scores(const std::vector<int>& reference,
                                 const std::vector<std::vector<int>>& partitions) {
  const std::size_t n = reference.size();
  if (n == 0) throw std::invalid_argument("empty reference partition");
  int p_ref = 0;
  for (int a : reference) {
    if (a < 0) throw std::invalid_argument("negative cluster label");
    p_ref = std::max(p_ref, a + 1);
  }

  StabilityReport report;
  report.B = static_cast<int>(partitions.size());
  report.scores.assign(n, 0.0);

  std::vector<int> ref_size(static_cast<std::size_t>(p_ref), 0);
  for (int a : reference) ++ref_size[static_cast<std::size_t>(a)];

  for (const std::vector<int>& part : partitions) {
    if (part.size() != n) throw std::invalid_argument("partition length mismatch");
    int p_b = 0;
    for (int a : part) {
      if (a < 0) throw std::invalid_argument("negative cluster label");
      p_b = std::max(p_b, a + 1);
    }
    // Joint counts let each observation's co-cluster overlap be read off in
    // O(1): |co(i,ref) ∩ co(i,b)| = joint[ref_i][b_i] - 1 (minus i itself).
    std::vector<int> b_size(static_cast<std::size_t>(p_b), 0);
    std::vector<std::vector<int>> joint(static_cast<std::size_t>(p_ref),
                                        std::vector<int>(static_cast<std::size_t>(p_b), 0));
    for (std::size_t i = 0; i < n; ++i) {
      ++b_size[static_cast<std::size_t>(part[i])];
      ++joint[static_cast<std::size_t>(reference[i])][static_cast<std::size_t>(part[i])];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int inter =
          joint[static_cast<std::size_t>(reference[i])][static_cast<std::size_t>(part[i])] - 1;
      const int uni = (ref_size[static_cast<std::size_t>(reference[i])] - 1) +
                      (b_size[static_cast<std::size_t>(part[i])] - 1) - inter;
      report.scores[i] += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    }
  }
  if (report.B > 0) {
    for (double& s : report.scores) s /= report.B;
  }

  auto median_of = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };

  std::vector<std::vector<double>> by_cluster(static_cast<std::size_t>(p_ref));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    by_cluster[static_cast<std::size_t>(reference[i])].push_back(report.scores[i]);
    total += report.scores[i];
  }
  report.overall_mean = total / static_cast<double>(n);
  report.overall_median = median_of(report.scores);
  report.cluster_mean.resize(static_cast<std::size_t>(p_ref), 0.0);
  report.cluster_median.resize(static_cast<std::size_t>(p_ref), 0.0);
  for (int k = 0; k < p_ref; ++k) {
    const std::vector<double>& v = by_cluster[static_cast<std::size_t>(k)];
    if (v.empty()) continue;
    double sum = 0.0;
    for (double s : v) sum += s;
    report.cluster_mean[static_cast<std::size_t>(k)] = sum / static_cast<double>(v.size());
    report.cluster_median[static_cast<std::size_t>(k)] = median_of(v);
  }
  return report;
}

StabilityReport stability_report(const std::vector<int>& reference,
                                 const BootstrapResult& bootstrap) {
  StabilityReport report = stability_scores(reference, bootstrap.partitions);
  for (int p : bootstrap.selected_p) ++report.p_counts[p];
  report.failures = bootstrap.failures;
  return report;
}

}  // namespace amdc
