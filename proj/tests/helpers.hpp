#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amdc/rng.hpp"
#include "amdc/types.hpp"

namespace testutil {

/// Sequence from a compact state string over single-character labels.
inline amdc::Sequence seq_of(const std::string& states, const amdc::Alphabet& ab,
                             const std::string& id = "s") {
  amdc::Sequence s;
  s.id = id;
  s.group_id = id;
  for (char c : states) s.states.push_back(ab.index(std::string(1, c)));
  return s;
}

inline amdc::SequenceSet set_of(const std::vector<std::string>& state_strings,
                                const amdc::Alphabet& ab) {
  std::vector<amdc::Sequence> seqs;
  for (std::size_t i = 0; i < state_strings.size(); ++i) {
    seqs.push_back(seq_of(state_strings[i], ab, "s" + std::to_string(i + 1)));
  }
  return amdc::SequenceSet(ab, std::move(seqs));
}

/// Uniformly random state string of length l over the alphabet's labels.
inline amdc::Sequence random_seq(const amdc::Alphabet& ab, int l, amdc::Rng& rng,
                                 const std::string& id = "s") {
  amdc::Sequence s;
  s.id = id;
  s.group_id = id;
  for (int j = 0; j < l; ++j) {
    s.states.push_back(
        static_cast<amdc::state_t>(rng.next_below(static_cast<std::uint64_t>(ab.size()))));
  }
  return s;
}

inline std::vector<int> to_int(const std::vector<amdc::state_t>& states) {
  return std::vector<int>(states.begin(), states.end());
}

}  // namespace testutil
