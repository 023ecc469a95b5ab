#include "amdc/markov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "amdc/parallel.hpp"
#include "amdc/rng.hpp"

namespace amdc {

namespace {

// State-overlap clusters give every active state this self-transition
// probability; duration clusters use it for the third state when only one or
// two states vary.
constexpr double kSlowSelfProb = 0.90;
// Self-transition probability of the second duration-family state when it
// does not vary. Distinct from kSlowSelfProb and from the varying values so
// that within any cluster all states have different mean run lengths: the
// ranking of states by occupied time then stays the same from sequence to
// sequence, which keeps the singular directions of the per-sequence
// adjacency matrices aligned within a cluster.
constexpr double kMidSelfProb = 0.75;
constexpr double kDirichletAlpha = 6.0;
// Fixed catalog seed: scenario definitions are part of the contract, so the
// higher-order jitter must not depend on run-time seeds.
constexpr std::uint64_t kCatalogSeed = 0x5ca1ab1e0c47a106ULL;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Order-1 row for one active state: self-prob q, rest uniform.
std::vector<double> order1_row(std::size_t a, std::size_t self, double q) {
  std::vector<double> row(a, a > 1 ? (1.0 - q) / static_cast<double>(a - 1) : 0.0);
  row[self] = a > 1 ? q : 1.0;
  return row;
}

/// Expands order-1 rows (one per active state, indexed locally) to an
/// order-k spec; k > 1 rows get Dirichlet-jittered off-diagonal mass.
MarkovSpec expand_order(const std::vector<std::vector<double>>& base_rows,
                        std::vector<state_t> states, int order, std::uint64_t jitter_seed) {
  const std::size_t a = states.size();
  MarkovSpec spec;
  spec.order = order;
  spec.states = std::move(states);
  const std::size_t contexts = ipow(a, order);
  spec.rows.resize(contexts);
  for (std::size_t code = 0; code < contexts; ++code) {
    const std::size_t last = code % a;  // most recent state is the low digit
    std::vector<double> row = base_rows[last];
    if (order > 1 && a > 1) {
      // Keep the self probability exact; re-split the rest across the other
      // states with a context-seeded Dirichlet draw.
      Rng rng(mix_seed(jitter_seed, code));
      std::vector<double> g(a - 1);
      double total = 0.0;
      for (double& x : g) {
        x = rng.next_gamma(kDirichletAlpha);
        total += x;
      }
      const double off_mass = 1.0 - row[last];
      std::size_t t = 0;
      for (std::size_t s = 0; s < a; ++s) {
        if (s == last) continue;
        row[s] = off_mass * g[t++] / total;
      }
    }
    spec.rows[code] = std::move(row);
  }
  spec.initial.assign(contexts, 1.0 / static_cast<double>(contexts));
  return spec;
}

const char* overlap_name(OverlapLevel o) {
  switch (o) {
    case OverlapLevel::low: return "low";
    case OverlapLevel::medium: return "medium";
    case OverlapLevel::high: return "high";
  }
  throw std::logic_error("bad overlap level");
}

}  // namespace

void MarkovSpec::validate() const {
  if (order < 1) throw std::invalid_argument("Markov order must be >= 1");
  const std::size_t a = states.size();
  if (a < 1) throw std::invalid_argument("Markov spec has no states");
  const std::size_t contexts = ipow(a, order);
  if (rows.size() != contexts) throw std::invalid_argument("wrong transition row count");
  for (const std::vector<double>& row : rows) {
    if (row.size() != a) throw std::invalid_argument("wrong transition row width");
    double sum = 0.0;
    for (double x : row) {
      if (x < 0.0) throw std::invalid_argument("negative transition probability");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("transition row does not sum to 1");
  }
  if (initial.size() != contexts) throw std::invalid_argument("wrong initial distribution size");
  double sum = 0.0;
  for (double x : initial) {
    if (x < 0.0) throw std::invalid_argument("negative initial probability");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("initial distribution does not sum to 1");
}

std::size_t MarkovSpec::context_count() const { return ipow(states.size(), order); }

Sequence simulate(const MarkovSpec& spec, int l, std::uint64_t seed) {
  spec.validate();
  if (l < 1) throw std::invalid_argument("sequence length must be >= 1");
  const std::size_t a = spec.states.size();
  const std::size_t wrap = ipow(a, spec.order - 1);

  Rng rng(seed);
  std::size_t context = static_cast<std::size_t>(rng.sample_discrete(spec.initial));
  Sequence seq;
  seq.states.reserve(static_cast<std::size_t>(l));
  for (int j = 0; j < l; ++j) {
    const std::size_t s = static_cast<std::size_t>(rng.sample_discrete(spec.rows[context]));
    seq.states.push_back(spec.states[s]);
    context = (context % wrap) * a + s;  // drop the oldest digit, append s
  }
  return seq;
}

std::string scenario_base_name(ScenarioFamily family, OverlapLevel overlap, int varying_states) {
  if (family == ScenarioFamily::state_overlap) {
    return std::string("state:") + overlap_name(overlap);
  }
  return std::string("duration:") + overlap_name(overlap) + ":" + std::to_string(varying_states);
}

ScenarioSpec build_scenario(ScenarioFamily family, OverlapLevel overlap, int varying_states,
                            int order) {
  if (order != 1 && order != 2 && order != 5) {
    throw std::invalid_argument("supported Markov orders are 1, 2 and 5");
  }

  ScenarioSpec spec;
  spec.family = family;
  spec.overlap = overlap;
  spec.order = order;
  spec.name = scenario_base_name(family, overlap, varying_states);
  if (order != 1) spec.name += ":order" + std::to_string(order);

  // One jitter stream per scenario, shared by all of its clusters and
  // independent of run seeds. Sharing matters: were each cluster jittered
  // differently, the jitter itself would separate the clusters, and
  // higher-order scenarios would no longer measure robustness to deviations
  // but a different (easier) problem.
  const std::uint64_t jitter_seed = mix_seed(kCatalogSeed, fnv1a(spec.name));

  if (family == ScenarioFamily::state_overlap) {
    if (varying_states != 0) {
      throw std::invalid_argument("varying_states applies only to the duration family");
    }
    spec.alphabet = Alphabet({"A", "B", "C", "D"});
    std::vector<std::vector<state_t>> active;
    switch (overlap) {
      case OverlapLevel::low:
        active = {{0, 1}, {2, 3}};
        break;
      case OverlapLevel::medium:
        active = {{0, 1}, {1, 2}, {2, 3}};
        break;
      case OverlapLevel::high:
        active = {{0, 1, 2}, {1, 2, 3}, {2, 3, 0}, {3, 0, 1}};
        break;
    }
    spec.n_clusters = static_cast<int>(active.size());
    for (int c = 0; c < spec.n_clusters; ++c) {
      const std::size_t a = active[static_cast<std::size_t>(c)].size();
      std::vector<std::vector<double>> base(a);
      for (std::size_t s = 0; s < a; ++s) base[s] = order1_row(a, s, kSlowSelfProb);
      spec.clusters.push_back(
          expand_order(base, active[static_cast<std::size_t>(c)], order, jitter_seed));
    }
    return spec;
  }

  // Duration family.
  if (varying_states < 1 || varying_states > 3) {
    throw std::invalid_argument("duration scenarios vary 1, 2 or 3 states");
  }
  spec.varying_states = varying_states;
  spec.alphabet = Alphabet({"A", "B", "C"});
  spec.n_clusters = 3;
  // Per-cluster self-transition probabilities for the varying states; the
  // triple tightens as the overlap level rises. Values stay well below 1 so
  // mean run lengths (1/(1-q), at most ~5 here) are short against the
  // sequence length and per-sequence duration statistics concentrate around
  // their cluster means. When several states vary, each cluster takes a
  // cyclic shift of the triple rather than one shared value: the states of a
  // cluster then never tie, so the occupancy ranking is stable within a
  // cluster (see kMidSelfProb) while every pair of clusters still differs in
  // each varying state's duration.
  std::vector<double> gaps;
  switch (overlap) {
    case OverlapLevel::low:
      gaps = {0.40, 0.60, 0.82};
      break;
    case OverlapLevel::medium:
      gaps = {0.45, 0.62, 0.79};
      break;
    case OverlapLevel::high:
      gaps = {0.50, 0.62, 0.74};
      break;
  }
  for (int c = 0; c < spec.n_clusters; ++c) {
    std::vector<std::vector<double>> base(3);
    for (int s = 0; s < 3; ++s) {
      double q;
      if (s < varying_states) {
        q = gaps[static_cast<std::size_t>((c + s) % 3)];
      } else {
        q = s == 2 ? kSlowSelfProb : kMidSelfProb;
      }
      base[static_cast<std::size_t>(s)] = order1_row(3, static_cast<std::size_t>(s), q);
    }
    spec.clusters.push_back(expand_order(base, {0, 1, 2}, order, jitter_seed));
  }
  return spec;
}

ScenarioSpec parse_scenario(const std::string& name) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= name.size()) {
    const std::size_t next = name.find(':', pos);
    if (next == std::string::npos) {
      parts.push_back(name.substr(pos));
      break;
    }
    parts.push_back(name.substr(pos, next - pos));
    pos = next + 1;
  }
  if (parts.size() < 2) {
    throw std::runtime_error("invalid scenario '" + name +
                             "', expected family:overlap[:varying][:orderK]");
  }

  int order = 1;
  if (parts.back().rfind("order", 0) == 0) {
    order = std::stoi(parts.back().substr(5));
    parts.pop_back();
  }

  OverlapLevel overlap;
  if (parts[1] == "low") {
    overlap = OverlapLevel::low;
  } else if (parts[1] == "medium") {
    overlap = OverlapLevel::medium;
  } else if (parts[1] == "high") {
    overlap = OverlapLevel::high;
  } else {
    throw std::runtime_error("unknown overlap level '" + parts[1] + "' in scenario '" + name + "'");
  }

  if (parts[0] == "state") {
    if (parts.size() != 2) throw std::runtime_error("state scenarios are state:<overlap>");
    return build_scenario(ScenarioFamily::state_overlap, overlap, 0, order);
  }
  if (parts[0] == "duration") {
    if (parts.size() != 3) throw std::runtime_error("duration scenarios are duration:<overlap>:<varying>");
    return build_scenario(ScenarioFamily::duration, overlap, std::stoi(parts[2]), order);
  }
  throw std::runtime_error("unknown scenario family '" + parts[0] + "'");
}

GeneratedDataset generate_dataset(const ScenarioSpec& spec, std::uint64_t seed, int threads) {
  if (spec.n_clusters < 1 || spec.clusters.size() != static_cast<std::size_t>(spec.n_clusters)) {
    throw std::invalid_argument("scenario has no cluster specs");
  }
  if (spec.n_sequences % spec.n_clusters != 0) {
    throw std::invalid_argument("n_sequences must be divisible by the cluster count");
  }
  const int per_cluster = spec.n_sequences / spec.n_clusters;

  GeneratedDataset out;
  out.labels.resize(static_cast<std::size_t>(spec.n_sequences));
  std::vector<Sequence> seqs(static_cast<std::size_t>(spec.n_sequences));
  parallel_for(static_cast<std::size_t>(spec.n_sequences), [&](std::size_t i) {
    const int cluster = static_cast<int>(i) / per_cluster;
    Sequence s = simulate(spec.clusters[static_cast<std::size_t>(cluster)], spec.l,
                          mix_seed(seed, i));
    char id[16];
    std::snprintf(id, sizeof(id), "seq%04zu", i + 1);
    s.id = id;
    s.group_id = id;
    seqs[i] = std::move(s);
    out.labels[i] = cluster;
  }, threads);
  out.set = SequenceSet(spec.alphabet, std::move(seqs));
  return out;
}

}  // namespace amdc
