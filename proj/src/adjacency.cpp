#include "amdc/adjacency.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "amdc/parallel.hpp"

namespace amdc {

namespace {

constexpr int kMinutesPerDay = 24 * 60;

int parse_clock_minutes(const std::string& s, std::size_t pos) {
  if (pos + 5 > s.size() || s[pos + 2] != ':') {
    throw std::runtime_error("invalid clock time in window '" + s + "'");
  }
  int hh = 0, mm = 0;
  auto r1 = std::from_chars(s.data() + pos, s.data() + pos + 2, hh);
  auto r2 = std::from_chars(s.data() + pos + 3, s.data() + pos + 5, mm);
  if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != s.data() + pos + 2 ||
      r2.ptr != s.data() + pos + 5 || hh < 0 || hh > 24 || mm < 0 || mm > 59 ||
      (hh == 24 && mm != 0)) {
    throw std::runtime_error("invalid clock time in window '" + s + "'");
  }
  return hh * 60 + mm;
}

}  // namespace

WeightWindow parse_weight_window(const std::string& window, double relative_weight) {
  if (window.size() != 11 || window[5] != '-') {
    throw std::runtime_error("invalid weight window '" + window + "', expected HH:MM-HH:MM");
  }
  WeightWindow w;
  w.start_minute = parse_clock_minutes(window, 0);
  w.end_minute = parse_clock_minutes(window, 6);
  w.relative_weight = relative_weight;
  if (w.start_minute == kMinutesPerDay) {
    throw std::runtime_error("weight window '" + window + "' starts at 24:00");
  }
  if (w.end_minute == 0) w.end_minute = kMinutesPerDay;
  if (w.relative_weight <= 0.0) {
    throw std::runtime_error("relative weight for window '" + window + "' must be positive");
  }
  return w;
}

WeightVector window_weights(std::span<const WeightWindow> windows, int l, int delta_minutes) {
  if (l < 2) throw std::invalid_argument("sequence length must be at least 2");
  if (delta_minutes <= 0) throw std::invalid_argument("delta_minutes must be positive");

  // Paint each window onto the 24 h minute grid; double coverage is a
  // configuration error.
  std::vector<double> minute_weight(kMinutesPerDay, 1.0);
  std::vector<bool> painted(kMinutesPerDay, false);
  for (const WeightWindow& w : windows) {
    auto paint = [&](int from, int to) {
      for (int t = from; t < to; ++t) {
        if (painted[t]) {
          throw std::runtime_error("overlapping weight windows at minute " + std::to_string(t));
        }
        painted[t] = true;
        minute_weight[t] = w.relative_weight;
      }
    };
    if (w.start_minute < w.end_minute) {
      paint(w.start_minute, std::min(w.end_minute, kMinutesPerDay));
    } else {
      paint(w.start_minute, kMinutesPerDay);
      paint(0, w.end_minute);
    }
  }

  WeightVector out;
  out.w.resize(static_cast<std::size_t>(l) - 1);
  for (int j = 0; j + 1 < l; ++j) {
    out.w[static_cast<std::size_t>(j)] =
        minute_weight[static_cast<std::size_t>((static_cast<std::int64_t>(j) * delta_minutes) %
                                               kMinutesPerDay)];
  }
  return out;
}

AdjacencyMatrix build_adjacency(const Sequence& seq, int m) {
  if (seq.length() < 2) throw std::invalid_argument("sequence too short for transitions");
  AdjacencyMatrix a;
  a.entries = Eigen::MatrixXd::Zero(m, m);
  a.l = seq.length();
  for (std::size_t j = 0; j + 1 < seq.states.size(); ++j) {
    a.entries(seq.states[j], seq.states[j + 1]) += 1.0;
  }
  return a;
}

AdjacencyMatrix build_weighted_adjacency(const Sequence& seq, const WeightVector& weights, int m) {
  if (seq.length() < 2) throw std::invalid_argument("sequence too short for transitions");
  if (weights.w.size() != seq.states.size() - 1) {
    throw std::invalid_argument("weight vector length must be l - 1");
  }
  bool uniform = true;
  for (double w : weights.w) {
    if (w <= 0.0) throw std::invalid_argument("weights must be positive");
    uniform = uniform && w == weights.w.front();
  }
  if (uniform) {
    // Rescaling cancels a constant weight exactly in theory but not in
    // floating point; short-circuit so the equality is bit for bit.
    return build_adjacency(seq, m);
  }

  AdjacencyMatrix a;
  a.entries = Eigen::MatrixXd::Zero(m, m);
  a.l = seq.length();
  a.weighted = true;
  for (std::size_t j = 0; j + 1 < seq.states.size(); ++j) {
    a.entries(seq.states[j], seq.states[j + 1]) += weights.w[j];
  }
  const double total = a.entries.sum();
  a.entries *= static_cast<double>(a.l - 1) / total;
  return a;
}

Eigen::VectorXd vec_rowmajor(const Eigen::MatrixXd& entries) {
  const Eigen::Index m = entries.rows();
  Eigen::VectorXd v(m * entries.cols());
  for (Eigen::Index u = 0; u < m; ++u) {
    for (Eigen::Index w = 0; w < entries.cols(); ++w) v(u * entries.cols() + w) = entries(u, w);
  }
  return v;
}

Eigen::MatrixXd unvec_rowmajor(const Eigen::VectorXd& column, int m) {
  if (column.size() != static_cast<Eigen::Index>(m) * m) {
    throw std::invalid_argument("column length is not m^2");
  }
  Eigen::MatrixXd t(m, m);
  for (int u = 0; u < m; ++u) {
    for (int w = 0; w < m; ++w) t(u, w) = column(u * m + w);
  }
  return t;
}

std::vector<std::string> vec_entry_labels(const Alphabet& alphabet) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(alphabet.size()) * alphabet.size());
  for (int u = 0; u < alphabet.size(); ++u) {
    for (int w = 0; w < alphabet.size(); ++w) {
      labels.push_back(alphabet.label(static_cast<state_t>(u)) + "->" +
                       alphabet.label(static_cast<state_t>(w)));
    }
  }
  return labels;
}

DataMatrix assemble(const SequenceSet& set, const std::optional<WeightVector>& weights,
                    int threads) {
  DataMatrix dm;
  dm.l = set.length();
  dm.m = set.alphabet().size();
  dm.n = static_cast<int>(set.size());
  dm.M.resize(static_cast<Eigen::Index>(dm.m) * dm.m, dm.n);
  parallel_for(set.size(), [&](std::size_t i) {
    const AdjacencyMatrix a = weights ? build_weighted_adjacency(set[i], *weights, dm.m)
                                      : build_adjacency(set[i], dm.m);
    dm.M.col(static_cast<Eigen::Index>(i)) = vec_rowmajor(a.entries);
  }, threads);
  return dm;
}

DataMatrix center(const DataMatrix& dm) {
  if (dm.centered) throw std::logic_error("data matrix is already centered");
  DataMatrix out = dm;
  out.M.array() -= static_cast<double>(dm.l - 1) / (static_cast<double>(dm.m) * dm.m);
  out.centered = true;
  return out;
}

}  // namespace amdc
