#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amdc/types.hpp"

namespace amdc {

/// Order-k Markov chain over a subset of an alphabet's states. Transition
/// rows are indexed by context code: the last k emitted states written as a
/// base-a number, oldest state most significant (a = active state count).
struct MarkovSpec {
  int order = 1;
  std::vector<state_t> states;              // active states, dataset indices
  std::vector<std::vector<double>> rows;    // a^k rows, each a probabilities
  std::vector<double> initial;              // distribution over a^k contexts

  void validate() const;
  std::size_t context_count() const;
};

/// Draws a length-l sequence: a hidden length-k context comes from
/// `initial`, then every emitted position is sampled from its context's row.
Sequence simulate(const MarkovSpec& spec, int l, std::uint64_t seed);

enum class ScenarioFamily { state_overlap, duration };
enum class OverlapLevel { low, medium, high };

/// A named data-generating process: one Markov chain per true cluster,
/// sequences drawn as an equal mixture across clusters.
struct ScenarioSpec {
  std::string name;
  ScenarioFamily family = ScenarioFamily::state_overlap;
  OverlapLevel overlap = OverlapLevel::low;
  int varying_states = 0;  // duration family: how many states vary (1..3)
  int n_clusters = 0;
  int order = 1;
  Alphabet alphabet;
  std::vector<MarkovSpec> clusters;
  int n_sequences = 100;
  int l = 200;
};

/// Concrete scenario catalog (version 1).
///
/// State-overlap family, 4 states A-D: low = 2 clusters on disjoint pairs
/// {A,B} / {C,D}; medium = 3 clusters {A,B} / {B,C} / {C,D} (one shared
/// state between neighbours); high = 4 clusters {A,B,C} / {B,C,D} / {C,D,A}
/// / {D,A,B} (two pairwise shared states). Every chain: self-transition
/// probability 0.90, remaining mass uniform over the cluster's other active
/// states.
///
/// Duration family, 3 states A-C, 3 clusters: all clusters use all three
/// states; they differ only in how long activities last, not in which states
/// occur. The first `varying_states` states take self-transition
/// probabilities from a gap triple -- low overlap {0.40, 0.60, 0.82},
/// medium {0.45, 0.62, 0.79}, high {0.50, 0.62, 0.74} -- with cluster c
/// assigning position (c + s) mod 3 of the triple to varying state s, so no
/// two states inside a cluster tie. Non-varying states keep fixed
/// self-probabilities (0.75 for the second state, 0.90 for the third),
/// again distinct from each other and from the triple.
///
/// Orders 2 and 5: each context's row starts from the order-1 row of the
/// context's most recent state; the self probability is kept exactly and
/// the off-diagonal mass is re-split by a Dirichlet(6) draw per context,
/// seeded per scenario and shared across its clusters, giving genuine
/// higher-order dependence with identical run-length structure and no extra
/// between-cluster signal. Initial contexts are uniform.
ScenarioSpec build_scenario(ScenarioFamily family, OverlapLevel overlap, int varying_states = 0,
                            int order = 1);

/// Scenario name round-trip: "state:low" or "duration:medium:2", with an
/// optional ":order<k>" suffix ("duration:low:2:order5").
ScenarioSpec parse_scenario(const std::string& name);
std::string scenario_base_name(ScenarioFamily family, OverlapLevel overlap, int varying_states);

struct GeneratedDataset {
  SequenceSet set;
  std::vector<int> labels;  // true cluster per sequence
};

/// Equal-mixture draw: n_sequences / n_clusters sequences per cluster, in
/// cluster-block order, ids "seq0001"... with per-sequence derived seeds.
GeneratedDataset generate_dataset(const ScenarioSpec& spec, std::uint64_t seed, int threads = 0);

}  // namespace amdc
