#include "amdc/cluster.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

#include "amdc/adjacency.hpp"
#include "amdc/parallel.hpp"
#include "amdc/rng.hpp"

namespace amdc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sq_dist(const RowMat& a, Eigen::Index i, const RowMat& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

struct LloydRun {
  std::vector<int> assignments;
  RowMat centers;
  double objective = 0.0;
};

void recompute_centers(const RowMat& pts, const std::vector<int>& a, int p, RowMat& centers) {
  centers.setZero();
  std::vector<int> counts(static_cast<std::size_t>(p), 0);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    centers.row(a[static_cast<std::size_t>(i)]) += pts.row(i);
    ++counts[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])];
  }
  for (int k = 0; k < p; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) centers.row(k) /= counts[static_cast<std::size_t>(k)];
  }
}

LloydRun lloyd_once(const RowMat& pts, int p, std::uint64_t seed) {
  const Eigen::Index n = pts.rows();
  Rng rng(seed);

  // k-means++ seeding.
  RowMat centers(p, pts.cols());
  std::vector<bool> is_center(static_cast<std::size_t>(n), false);
  {
    const Eigen::Index first = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
    centers.row(0) = pts.row(first);
    is_center[static_cast<std::size_t>(first)] = true;
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(pts, i, centers, 0);
    for (int c = 1; c < p; ++c) {
      double total = 0.0;
      for (double v : d2) total += v;
      Eigen::Index pick;
      if (total > 0.0) {
        pick = rng.sample_discrete(d2);
      } else {
        // All points coincide with chosen centers; take the first unused one.
        pick = 0;
        while (pick < n && is_center[static_cast<std::size_t>(pick)]) ++pick;
        if (pick == n) pick = 0;
      }
      centers.row(c) = pts.row(pick);
      is_center[static_cast<std::size_t>(pick)] = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist(pts, i, centers, c));
      }
    }
  }

  std::vector<int> a(static_cast<std::size_t>(n), -1);
  std::vector<int> prev;
  std::vector<int> counts(static_cast<std::size_t>(p), 0);
  for (int iter = 0; iter < 300; ++iter) {
    // Assignment step; ties go to the lowest cluster index.
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(pts, i, centers, 0);
      for (int k = 1; k < p; ++k) {
        const double d = sq_dist(pts, i, centers, k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      a[static_cast<std::size_t>(i)] = best;
      ++counts[static_cast<std::size_t>(best)];
    }
    // Reseed any emptied cluster at the point farthest from its current
    // center (first such point on ties), excluding points already used.
    std::vector<bool> reseeded(static_cast<std::size_t>(n), false);
    for (int k = 0; k < p; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (reseeded[static_cast<std::size_t>(i)]) continue;
        const int ai = a[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(ai)] <= 1) continue;  // don't empty another cluster
        const double d = sq_dist(pts, i, centers, ai);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) break;  // fewer distinct points than clusters
      --counts[static_cast<std::size_t>(a[static_cast<std::size_t>(far)])];
      a[static_cast<std::size_t>(far)] = k;
      ++counts[static_cast<std::size_t>(k)];
      centers.row(k) = pts.row(far);
      reseeded[static_cast<std::size_t>(far)] = true;
    }
    if (detail::lloyd_objective_trace) {
      double obj = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) obj += sq_dist(pts, i, centers, a[static_cast<std::size_t>(i)]);
      detail::lloyd_objective_trace->push_back(obj);
    }
    if (a == prev) break;
    prev = a;
    recompute_centers(pts, a, p, centers);
  }

  recompute_centers(pts, a, p, centers);
  LloydRun run;
  run.objective = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    run.objective += sq_dist(pts, i, centers, a[static_cast<std::size_t>(i)]);
  }
  run.assignments = std::move(a);
  run.centers = std::move(centers);
  return run;
}

/// Validated members-by-cluster view of an assignment vector.
struct Grouping {
  int p = 0;
  std::vector<std::vector<int>> members;
};

Grouping group_assignments(std::size_t n, const std::vector<int>& assignments) {
  if (assignments.size() != n) throw std::invalid_argument("assignment length mismatch");
  int p = 0;
  for (int a : assignments) {
    if (a < 0) throw std::invalid_argument("negative cluster label");
    p = std::max(p, a + 1);
  }
  Grouping g;
  g.p = p;
  g.members.resize(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < n; ++i) {
    g.members[static_cast<std::size_t>(assignments[i])].push_back(static_cast<int>(i));
  }
  for (const auto& mem : g.members) {
    if (mem.empty()) throw std::invalid_argument("empty cluster in assignments");
  }
  return g;
}

Eigen::MatrixXd mean_of(const std::vector<Eigen::MatrixXd>& mats, const std::vector<int>& idx) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(mats.front().rows(), mats.front().cols());
  for (int i : idx) acc += mats[static_cast<std::size_t>(i)];
  return acc / static_cast<double>(idx.size());
}

std::vector<Eigen::VectorXd> singular_values_of(const std::vector<Eigen::MatrixXd>& mats,
                                                int threads = 0) {
  std::vector<Eigen::VectorXd> sv(mats.size());
  parallel_for(mats.size(), [&](std::size_t i) { sv[i] = svd_signed(mats[i]).S; }, threads);
  return sv;
}

/// metric_D with the per-matrix singular values precomputed; the grid search
/// reuses one set of singular values across all (h, p) cells.
MetricReport metric_report_cached(const std::vector<Eigen::MatrixXd>& mats,
                                  const std::vector<Eigen::VectorXd>& sv,
                                  const std::vector<int>& assignments) {
  const Grouping g = group_assignments(mats.size(), assignments);
  const std::size_t n = mats.size();
  if (g.p < 2) throw std::invalid_argument("metric requires at least 2 clusters");

  Eigen::MatrixXd grand = Eigen::MatrixXd::Zero(mats.front().rows(), mats.front().cols());
  for (const Eigen::MatrixXd& t : mats) grand += t;
  grand /= static_cast<double>(n);
  const SvdFactors f0 = svd_signed(grand);

  MetricReport r;
  for (const std::vector<int>& mem : g.members) {
    const Eigen::MatrixXd tk = mean_of(mats, mem);
    const SvdFactors fk = svd_signed(tk);
    for (int i : mem) {
      const Eigen::MatrixXd& ti = mats[static_cast<std::size_t>(i)];
      r.d_w += (ti - fk.U * sv[static_cast<std::size_t>(i)].asDiagonal() * fk.V.transpose())
                   .squaredNorm();
      r.wss += (ti - tk).squaredNorm();
    }
    const double nk = static_cast<double>(mem.size());
    r.d_b += nk * (tk - f0.U * fk.S.asDiagonal() * f0.V.transpose()).squaredNorm();
    r.bss += nk * (tk - grand).squaredNorm();
  }

  // Pseudo-F ratio with sentinel cases: zero within-dispersion means either
  // a perfect split (+inf) or fully degenerate data (0).
  const double dfw = static_cast<double>(n) - g.p;
  const double dfb = static_cast<double>(g.p) - 1.0;
  auto ratio = [&](double w, double b) {
    if (w == 0.0) return b == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (b / dfb) / (w / dfw);
  };
  r.D = ratio(r.d_w, r.d_b);
  r.D_standard = ratio(r.wss, r.bss);
  return r;
}

/// True when x is a strictly better grid cell than y: higher D, then higher
/// d_b among infinite-D cells, then smaller p, then smaller h.
bool cell_better(const CellResult& x, const CellResult& y) {
  const bool xi = std::isinf(x.metrics.D), yi = std::isinf(y.metrics.D);
  if (xi != yi) return xi;
  if (xi && yi) {
    if (x.metrics.d_b != y.metrics.d_b) return x.metrics.d_b > y.metrics.d_b;
  } else if (x.metrics.D != y.metrics.D) {
    return x.metrics.D > y.metrics.D;
  }
  if (x.p != y.p) return x.p < y.p;
  return x.h < y.h;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int p, int restarts, std::uint64_t seed) {
  if (points.rows() < 1) throw std::invalid_argument("kmeans: no points");
  if (p < 1 || p > points.rows()) throw std::invalid_argument("kmeans: p must be in [1, n]");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");

  const RowMat pts = points;
  LloydRun best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    LloydRun run = lloyd_once(pts, p, mix_seed(seed, static_cast<std::uint64_t>(r)));
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
  }
  KmeansResult out;
  out.assignments = std::move(best.assignments);
  out.centers = best.centers;
  out.objective = best.objective;
  return out;
}

double within_metric(const std::vector<Eigen::MatrixXd>& matrices,
                     const std::vector<int>& assignments) {
  const Grouping g = group_assignments(matrices.size(), assignments);
  const std::vector<Eigen::VectorXd> sv = singular_values_of(matrices);
  double d_w = 0.0;
  for (const std::vector<int>& mem : g.members) {
    const SvdFactors fk = svd_signed(mean_of(matrices, mem));
    for (int i : mem) {
      d_w += (matrices[static_cast<std::size_t>(i)] -
              fk.U * sv[static_cast<std::size_t>(i)].asDiagonal() * fk.V.transpose())
                 .squaredNorm();
    }
  }
  return d_w;
}

double between_metric(const std::vector<Eigen::MatrixXd>& matrices,
                      const std::vector<int>& assignments) {
  const Grouping g = group_assignments(matrices.size(), assignments);
  Eigen::MatrixXd grand = Eigen::MatrixXd::Zero(matrices.front().rows(), matrices.front().cols());
  for (const Eigen::MatrixXd& t : matrices) grand += t;
  grand /= static_cast<double>(matrices.size());
  const SvdFactors f0 = svd_signed(grand);
  double d_b = 0.0;
  for (const std::vector<int>& mem : g.members) {
    const Eigen::MatrixXd tk = mean_of(matrices, mem);
    const Eigen::VectorXd sk = svd_signed(tk).S;
    d_b += static_cast<double>(mem.size()) *
           (tk - f0.U * sk.asDiagonal() * f0.V.transpose()).squaredNorm();
  }
  return d_b;
}

MetricReport metric_D(const std::vector<Eigen::MatrixXd>& matrices,
                      const std::vector<int>& assignments) {
  return metric_report_cached(matrices, singular_values_of(matrices), assignments);
}

FitResult fit(const SequenceSet& set, const FitOptions& options) {
  const std::size_t n = set.size();
  const int m = set.alphabet().size();
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds_since = [](std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const DataMatrix data = assemble(set, options.weights, options.threads);
  FitResult result;
  result.centered = center(data);
  result.factors = decompose(result.centered);
  result.prep_seconds = seconds_since(t0);

  std::vector<Eigen::MatrixXd> mats(n);
  parallel_for(n, [&](std::size_t i) {
    mats[i] = unvec_rowmajor(data.M.col(static_cast<Eigen::Index>(i)), m);
  }, options.threads);
  const std::vector<Eigen::VectorXd> sv = singular_values_of(mats, options.threads);

  Eigen::MatrixXd grand = Eigen::MatrixXd::Zero(m, m);
  for (const Eigen::MatrixXd& t : mats) grand += t;
  grand /= static_cast<double>(n);

  std::vector<int> h_grid = options.h_grid;
  if (h_grid.empty()) {
    for (int h = 1; h <= std::min(10, result.factors.rank); ++h) h_grid.push_back(h);
  } else {
    // Never offer directions whose singular value is numerically zero.
    std::erase_if(h_grid, [&](int h) { return h > result.factors.rank; });
    for (int h : h_grid) {
      if (h < 1) throw std::invalid_argument("h grid values must be >= 1");
    }
  }
  std::vector<int> p_grid = options.p_grid;
  if (p_grid.empty()) {
    const int p_max = static_cast<int>(std::min<std::size_t>(10, n));
    for (int p = 2; p <= p_max; ++p) p_grid.push_back(p);
  }
  for (int p : p_grid) {
    if (p < 2 || static_cast<std::size_t>(p) > n) {
      throw std::invalid_argument("p grid values must lie in [2, n]");
    }
  }

  ClusterModel& model = result.model;
  model.restarts_used = options.restarts;
  model.seed = options.seed;

  if (h_grid.empty() || p_grid.empty()) {
    // Nothing to search (e.g. the centered matrix is identically zero):
    // report the single-cluster degenerate model.
    model.h = 0;
    model.p = 1;
    model.assignments.assign(n, 0);
    model.centers = Eigen::MatrixXd::Zero(1, 0);
    model.cluster_means = {grand};
    model.grand_mean = grand;
    model.degenerate = true;
    result.total_seconds = seconds_since(t0);
    return result;
  }

  result.cells.resize(h_grid.size() * p_grid.size());
  parallel_for(result.cells.size(), [&](std::size_t c) {
    const int h = h_grid[c / p_grid.size()];
    const int p = p_grid[c % p_grid.size()];
    const Eigen::MatrixXd emb = result.factors.V.leftCols(h);
    KmeansResult km = kmeans(emb, p, options.restarts,
                             mix_seed(options.seed, (static_cast<std::uint64_t>(h) << 32) |
                                                        static_cast<std::uint64_t>(p)));
    CellResult& cell = result.cells[c];
    cell.h = h;
    cell.p = p;
    cell.metrics = metric_report_cached(mats, sv, km.assignments);
    cell.assignments = std::move(km.assignments);
    cell.centers = std::move(km.centers);
  }, options.threads);

  std::size_t best = 0;
  for (std::size_t c = 1; c < result.cells.size(); ++c) {
    if (cell_better(result.cells[c], result.cells[best])) best = c;
  }
  const CellResult& win = result.cells[best];

  model.h = win.h;
  model.p = win.p;
  model.assignments = win.assignments;
  model.centers = win.centers;
  model.metrics = win.metrics;
  model.grand_mean = grand;
  model.degenerate = win.metrics.d_b == 0.0;
  const Grouping g = group_assignments(n, win.assignments);
  model.cluster_means.reserve(static_cast<std::size_t>(g.p));
  for (const std::vector<int>& mem : g.members) {
    model.cluster_means.push_back(mean_of(mats, mem));
  }
  result.total_seconds = seconds_since(t0);
  return result;
}

std::vector<int> assign(const ClusterModel& model, const Eigen::MatrixXd& points) {
  if (points.cols() != model.centers.cols()) {
    throw std::invalid_argument("point dimension does not match the model embedding");
  }
  std::vector<int> labels(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = (points.row(i) - model.centers.row(0)).squaredNorm();
    for (Eigen::Index k = 1; k < model.centers.rows(); ++k) {
      const double d = (points.row(i) - model.centers.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

}  // namespace amdc
