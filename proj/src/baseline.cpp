#include "amdc/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "amdc/parallel.hpp"

namespace amdc {

int levenshtein(const Sequence& a, const Sequence& b) {
  const std::vector<state_t>& s = a.states;
  const std::vector<state_t>& t = b.states;
  std::vector<int> prev(t.size() + 1), cur(t.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= s.size(); ++i) {
    cur[0] = static_cast<int>(i);
    const state_t si = s[i - 1];
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const int sub = prev[j - 1] + (si == t[j - 1] ? 0 : 1);
      const int del = prev[j] + 1;
      const int ins = cur[j - 1] + 1;
      cur[j] = std::min(sub, std::min(del, ins));
    }
    std::swap(prev, cur);
  }
  return prev[t.size()];
}

DistanceMatrix distance_matrix(const SequenceSet& set, int threads) {
  const int n = static_cast<int>(set.size());
  if (n < 2) throw std::invalid_argument("distance matrix needs at least 2 sequences");
  DistanceMatrix dm(n);
  // One work item per row keeps items coarse; row i covers pairs (i, j>i).
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    for (int j = static_cast<int>(i) + 1; j < n; ++j) {
      dm.set(static_cast<int>(i), j, levenshtein(set[i], set[static_cast<std::size_t>(j)]));
    }
  }, threads);
  return dm;
}

Dendrogram upgma(const DistanceMatrix& dm) {
  const int n = dm.size();
  if (n < 2) throw std::invalid_argument("dendrogram needs at least 2 points");

  // Working distances between active clusters, identified by the smallest
  // original member index. Lance-Williams for average linkage:
  // d(a+b, c) = (n_a d(a,c) + n_b d(b,c)) / (n_a + n_b).
  std::vector<double> d(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(i) * n + j] = dm(i, j);
  }
  auto dist = [&](int i, int j) -> double& { return d[static_cast<std::size_t>(i) * n + j]; };

  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<int> nn(static_cast<std::size_t>(n), -1);
  std::vector<double> nnd(static_cast<std::size_t>(n), 0.0);

  // Nearest active neighbour of i, scanning ascending so the smallest index
  // wins equal distances.
  auto rescan = [&](int i) {
    nn[static_cast<std::size_t>(i)] = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i || !active[static_cast<std::size_t>(j)]) continue;
      if (dist(i, j) < best) {
        best = dist(i, j);
        nn[static_cast<std::size_t>(i)] = j;
      }
    }
    nnd[static_cast<std::size_t>(i)] = best;
  };
  for (int i = 0; i < n; ++i) rescan(i);

  Dendrogram out;
  out.merges.reserve(static_cast<std::size_t>(n) - 1);
  for (int step = 0; step < n - 1; ++step) {
    // Global closest pair; scanning ascending makes ties resolve to the
    // lexicographically smallest (i, nn[i]).
    int a = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)] && nnd[static_cast<std::size_t>(i)] < best) {
        best = nnd[static_cast<std::size_t>(i)];
        a = i;
      }
    }
    int b = nn[static_cast<std::size_t>(a)];
    if (b < a) std::swap(a, b);

    const int na = size[static_cast<std::size_t>(a)];
    const int nb = size[static_cast<std::size_t>(b)];
    out.merges.push_back({a, b, best, na + nb});

    // Merge b into a (a is the smaller id), update distances to survivors.
    active[static_cast<std::size_t>(b)] = false;
    size[static_cast<std::size_t>(a)] = na + nb;
    for (int c = 0; c < n; ++c) {
      if (!active[static_cast<std::size_t>(c)] || c == a) continue;
      const double v = (na * dist(a, c) + nb * dist(b, c)) / (na + nb);
      dist(a, c) = v;
      dist(c, a) = v;
      // The new cluster may become c's nearest neighbour; equal distance
      // with a smaller id also takes over to keep tie-breaks exact.
      if (nn[static_cast<std::size_t>(c)] != a && nn[static_cast<std::size_t>(c)] != b) {
        if (v < nnd[static_cast<std::size_t>(c)] ||
            (v == nnd[static_cast<std::size_t>(c)] && a < nn[static_cast<std::size_t>(c)])) {
          nnd[static_cast<std::size_t>(c)] = v;
          nn[static_cast<std::size_t>(c)] = a;
        }
      }
    }
    // Rows whose cached neighbour vanished or changed distance are rescanned.
    for (int c = 0; c < n; ++c) {
      if (!active[static_cast<std::size_t>(c)] || c == a) continue;
      if (nn[static_cast<std::size_t>(c)] == a || nn[static_cast<std::size_t>(c)] == b) rescan(c);
    }
    if (step < n - 2) rescan(a);
  }
  return out;
}

std::vector<int> cut_dendrogram(const Dendrogram& dendro, int n, int p) {
  if (p < 1 || p > n) throw std::invalid_argument("cut size must lie in [1, n]");
  if (dendro.merges.size() != static_cast<std::size_t>(n) - 1) {
    throw std::invalid_argument("dendrogram does not match n");
  }
  // Cluster ids equal each cluster's smallest member, so replaying merges
  // into the left id reproduces the labeling directly.
  std::vector<int> root(static_cast<std::size_t>(n));
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int x) {
    while (root[static_cast<std::size_t>(x)] != x) {
      root[static_cast<std::size_t>(x)] = root[static_cast<std::size_t>(root[static_cast<std::size_t>(x)])];
      x = root[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int step = 0; step < n - p; ++step) {
    const MergeRecord& mr = dendro.merges[static_cast<std::size_t>(step)];
    root[static_cast<std::size_t>(find(mr.right))] = find(mr.left);
  }
  // Number clusters by smallest member index.
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<int> out(static_cast<std::size_t>(n));
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (label[static_cast<std::size_t>(r)] < 0) label[static_cast<std::size_t>(r)] = next++;
    out[static_cast<std::size_t>(i)] = label[static_cast<std::size_t>(r)];
  }
  return out;
}

std::vector<int> hierarchical(const DistanceMatrix& dm, int p) {
  if (p < 2 || p > dm.size()) throw std::invalid_argument("p must lie in [2, n]");
  return cut_dendrogram(upgma(dm), dm.size(), p);
}

double dunn_index(const DistanceMatrix& dm, const std::vector<int>& assignments) {
  const int n = dm.size();
  if (assignments.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("assignment length mismatch");
  }
  int p = 0;
  for (int a : assignments) {
    if (a < 0) throw std::invalid_argument("negative cluster label");
    p = std::max(p, a + 1);
  }
  if (p < 2) throw std::invalid_argument("Dunn index requires at least 2 clusters");

  double min_between = std::numeric_limits<double>::infinity();
  double max_diameter = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (assignments[static_cast<std::size_t>(i)] == assignments[static_cast<std::size_t>(j)]) {
        max_diameter = std::max(max_diameter, dm(i, j));
      } else {
        min_between = std::min(min_between, dm(i, j));
      }
    }
  }
  if (max_diameter == 0.0) return std::numeric_limits<double>::infinity();
  return min_between / max_diameter;
}

HierFitResult hier_fit(const SequenceSet& set, const std::vector<int>& p_grid, int threads) {
  if (p_grid.empty()) throw std::invalid_argument("empty p grid");
  const int n = static_cast<int>(set.size());
  for (int p : p_grid) {
    if (p < 2 || p > n) throw std::invalid_argument("p grid values must lie in [2, n]");
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds_since = [](std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const DistanceMatrix dm = distance_matrix(set, threads);
  const double prep_seconds = seconds_since(t0);
  Dendrogram dendro = upgma(dm);

  bool all_zero = true;
  for (int i = 0; i < n && all_zero; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (dm(i, j) != 0.0) {
        all_zero = false;
        break;
      }
    }
  }

  HierFitResult result;
  result.degenerate = all_zero;
  std::vector<std::vector<int>> cuts(p_grid.size());
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    cuts[k] = cut_dendrogram(dendro, n, p_grid[k]);
    result.dunn_values.emplace_back(p_grid[k], dunn_index(dm, cuts[k]));
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < p_grid.size(); ++k) {
    // Strictly greater keeps the earlier (smaller) p on ties; the grid is
    // used as given, so callers pass it ascending.
    if (result.dunn_values[k].second > result.dunn_values[best].second) best = k;
  }
  result.p = p_grid[best];
  result.assignments = std::move(cuts[best]);
  result.dendrogram = std::move(dendro);
  result.prep_seconds = prep_seconds;
  result.total_seconds = seconds_since(t0);
  return result;
}

}  // namespace amdc
