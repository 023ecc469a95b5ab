#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amdc/types.hpp"

namespace amdc {

// ---- civil date helpers (single local zone, no DST arithmetic) ----

/// Days since 1970-01-01 for a civil date.
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

/// Parses "yyyy-mm-dd".
std::int64_t parse_date_days(const std::string& date);
std::string format_date_days(std::int64_t days);

/// Parses "yyyy-mm-dd[T ]hh:mm[:ss]" to seconds since the civil epoch.
std::int64_t parse_datetime_sec(const std::string& ts);

/// Weekday with Monday = 0 ... Sunday = 6.
int weekday_mon0(std::int64_t days);

/// Accepts full names or >=3-letter prefixes, case-insensitive.
int parse_weekday(const std::string& name);
const std::string& weekday_name(int mon0);

// ---- episode ingestion ----

/// Day window in minutes from local midnight, [start, end).
struct DaySpan {
  int start_minute = 0;
  int end_minute = 24 * 60;
};

/// Builds one day sequence from the episodes of a single (group, date).
/// Each position takes the state covering the majority of its delta-minute
/// interval; ties go to the state covering the earliest instant of the
/// interval. Positions with zero coverage mark the sequence as `missing`
/// (their cells are filled from the nearest covered neighbour so the index
/// invariant holds; such sequences exist only to be dropped by the filter).
/// Overlapping episodes are an error.
Sequence episodes_to_sequence(std::span<const Episode> episodes, const Alphabet& alphabet,
                              int delta_minutes, DaySpan span = {});

/// Groups episodes by (group_id, date) and builds every day sequence, in
/// order of first appearance of the group and ascending date within a group.
SequenceSet episodes_to_dataset(const std::vector<Episode>& episodes, const Alphabet& alphabet,
                                int delta_minutes, DaySpan span = {}, int threads = 0);

// ---- state collapsing ----

struct StateMapping {
  // source label -> target label; must be total on the source alphabet
  std::vector<std::pair<std::string, std::string>> pairs;
};

/// Relabels every sequence through the mapping. The target alphabet is taken
/// from `target` when given; otherwise target labels are ordered by first
/// appearance while scanning the source alphabet in order.
SequenceSet map_states(const SequenceSet& set, const StateMapping& mapping,
                       const std::optional<Alphabet>& target = std::nullopt);

// ---- dataset filtering ----

struct FilterRules {
  bool drop_missing = true;
  /// Drop sequences with more than this fraction of positions in
  /// `away_states` (fraction of total positions). Inactive when
  /// away_states is empty.
  double max_away_fraction = 1.0;
  std::vector<std::string> away_states;
  /// Per group, uniformly sample at most this many sequences (0 = no cap).
  int max_per_group = 0;
  std::uint64_t seed = 0;
};

struct FilterStats {
  int dropped_missing = 0;
  int dropped_away = 0;
  int dropped_cap = 0;
};

SequenceSet filter_dataset(const SequenceSet& set, const FilterRules& rules,
                           FilterStats* stats = nullptr);

// ---- week concatenation ----

struct ConcatStats {
  int weeks_built = 0;
  int groups_omitted = 0;  // groups with day data but no complete run
};

/// Concatenates, per group, every run of consecutive calendar dates whose
/// weekdays match `weekday_names` in order (e.g. Monday..Friday). Groups
/// without a complete run are omitted silently; counts are reported through
/// `stats`. Requires date metadata on every sequence.
SequenceSet concat_weeks(const SequenceSet& set, const std::vector<std::string>& weekday_names,
                         ConcatStats* stats = nullptr);

}  // namespace amdc
