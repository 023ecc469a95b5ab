#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace amdc {

using state_t = std::uint8_t;

/// Sentinel for sequences without calendar metadata.
inline constexpr std::int64_t kNoDate = INT64_MIN;

/// Ordered set of distinct state labels. The label order fixes the row and
/// column order of every adjacency matrix built over this alphabet.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2)
      throw std::invalid_argument("Alphabet: need at least 2 states");
    if (labels_.size() > 256)
      throw std::invalid_argument("Alphabet: more than 256 states not supported");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty())
        throw std::invalid_argument("Alphabet: empty state label");
      auto [it, inserted] = index_.emplace(labels_[i], static_cast<state_t>(i));
      if (!inserted)
        throw std::invalid_argument("Alphabet: duplicate state label '" + labels_[i] + "'");
    }
  }

  int size() const { return static_cast<int>(labels_.size()); }

  const std::string& label(state_t idx) const { return labels_.at(idx); }
  const std::vector<std::string>& labels() const { return labels_; }

  bool contains(const std::string& label) const { return index_.count(label) != 0; }

  state_t index(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end())
      throw std::invalid_argument("Alphabet: unknown state label '" + label + "'");
    return it->second;
  }

  /// True when every label is a single character, i.e. sequences can be
  /// serialized as compact state strings.
  bool single_char() const {
    for (const auto& l : labels_)
      if (l.size() != 1) return false;
    return true;
  }

  bool operator==(const Alphabet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, state_t> index_;
};

/// One categorical sequence: l states at a fixed time quantum of
/// `delta_minutes` per position. `date_days` (days since 1970-01-01) is
/// optional calendar metadata carried through from episode ingestion; it is
/// required for week concatenation and kNoDate otherwise. `missing` marks
/// sequences that had uncovered time intervals during ingestion.
struct Sequence {
  std::string id;
  std::string group_id;
  std::vector<state_t> states;
  int delta_minutes = 5;
  std::int64_t date_days = kNoDate;
  bool missing = false;

  int length() const { return static_cast<int>(states.size()); }
};

/// A contiguous time interval spent in one state; the raw unit of activity
/// tracker output. Timestamps are seconds since the civil epoch (1970-01-01
/// 00:00 local) so that intervals may cross midnight; they are clipped to the
/// day span of the date the episode is filed under during ingestion.
struct Episode {
  std::string group_id;
  std::int64_t date_days = 0;  // day the episode is filed under
  std::int64_t start_sec = 0;
  std::int64_t end_sec = 0;
  std::string state;
};

/// A uniform collection of sequences: one shared alphabet, one shared length.
class SequenceSet {
 public:
  SequenceSet() = default;

  SequenceSet(Alphabet alphabet, std::vector<Sequence> sequences)
      : alphabet_(std::move(alphabet)), sequences_(std::move(sequences)) {
    if (sequences_.empty())
      throw std::invalid_argument("SequenceSet: empty sequence list");
    const int l = sequences_.front().length();
    if (l < 2) throw std::invalid_argument("SequenceSet: sequences must have length >= 2");
    const int m = alphabet_.size();
    for (const auto& s : sequences_) {
      if (s.length() != l)
        throw std::invalid_argument("SequenceSet: sequence '" + s.id +
                                    "' has length " + std::to_string(s.length()) +
                                    ", expected " + std::to_string(l));
      for (state_t v : s.states)
        if (static_cast<int>(v) >= m)
          throw std::invalid_argument("SequenceSet: sequence '" + s.id +
                                      "' contains state index out of range");
    }
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<Sequence>& sequences() const { return sequences_; }
  const Sequence& operator[](std::size_t i) const { return sequences_[i]; }

  std::size_t size() const { return sequences_.size(); }
  int length() const { return sequences_.front().length(); }

 private:
  Alphabet alphabet_;
  std::vector<Sequence> sequences_;
};

}  // namespace amdc
