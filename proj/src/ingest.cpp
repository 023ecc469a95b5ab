#include "amdc/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "amdc/parallel.hpp"
#include "amdc/rng.hpp"

namespace amdc {

namespace {

constexpr std::int64_t kSecPerDay = 86400;

int parse_int_field(const std::string& s, std::size_t pos, std::size_t len) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
  if (ec != std::errc{} || ptr != s.data() + pos + len) {
    throw std::runtime_error("invalid number in date/time: '" + s + "'");
  }
  return value;
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

std::int64_t parse_date_days(const std::string& date) {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') {
    throw std::runtime_error("invalid date '" + date + "', expected yyyy-mm-dd");
  }
  const int y = parse_int_field(date, 0, 4);
  const int m = parse_int_field(date, 5, 2);
  const int d = parse_int_field(date, 8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw std::runtime_error("invalid date '" + date + "'");
  }
  return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string format_date_days(std::int64_t days) {
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

std::int64_t parse_datetime_sec(const std::string& ts) {
  // yyyy-mm-ddThh:mm[:ss], 'T' or ' ' separator, optional trailing 'Z'
  std::string s = ts;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') {
    throw std::runtime_error("invalid timestamp '" + ts + "'");
  }
  const std::int64_t days = parse_date_days(s.substr(0, 10));
  const int hh = parse_int_field(s, 11, 2);
  const int mm = parse_int_field(s, 14, 2);
  int ss = 0;
  if (s.size() >= 19) {
    if (s[16] != ':') throw std::runtime_error("invalid timestamp '" + ts + "'");
    ss = parse_int_field(s, 17, 2);
  } else if (s.size() != 16) {
    throw std::runtime_error("invalid timestamp '" + ts + "'");
  }
  if (hh < 0 || hh > 24 || mm < 0 || mm > 59 || ss < 0 || ss > 59) {
    throw std::runtime_error("invalid timestamp '" + ts + "'");
  }
  return days * kSecPerDay + hh * 3600 + mm * 60 + ss;
}

int weekday_mon0(std::int64_t days) {
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

namespace {
const std::string kWeekdayNames[7] = {"Monday",   "Tuesday", "Wednesday", "Thursday",
                                      "Friday",   "Saturday", "Sunday"};
}

const std::string& weekday_name(int mon0) {
  if (mon0 < 0 || mon0 > 6) throw std::out_of_range("weekday index out of range");
  return kWeekdayNames[mon0];
}

int parse_weekday(const std::string& name) {
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower.size() < 3) throw std::runtime_error("unknown weekday '" + name + "'");
  for (int i = 0; i < 7; ++i) {
    std::string full;
    for (char c : kWeekdayNames[i]) full.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (full.compare(0, lower.size(), lower) == 0) return i;
  }
  throw std::runtime_error("unknown weekday '" + name + "'");
}

Sequence episodes_to_sequence(std::span<const Episode> episodes, const Alphabet& alphabet,
                              int delta_minutes, DaySpan span) {
  if (delta_minutes <= 0) throw std::invalid_argument("delta_minutes must be positive");
  const int span_minutes = span.end_minute - span.start_minute;
  if (span_minutes <= 0 || span.start_minute < 0 || span.end_minute > 24 * 60) {
    throw std::invalid_argument("invalid day span");
  }
  if (span_minutes % delta_minutes != 0) {
    throw std::invalid_argument("delta_minutes must divide the day span evenly");
  }
  if (episodes.empty()) throw std::invalid_argument("no episodes for day");

  const std::string& group = episodes.front().group_id;
  const std::int64_t date_days = episodes.front().date_days;
  for (const Episode& e : episodes) {
    if (e.group_id != group || e.date_days != date_days) {
      throw std::invalid_argument("episodes span multiple groups or dates");
    }
    if (e.start_sec >= e.end_sec) {
      throw std::runtime_error("episode with non-positive duration for group '" + group + "'");
    }
  }

  // Validate non-overlap on the raw intervals.
  std::vector<const Episode*> order;
  order.reserve(episodes.size());
  for (const Episode& e : episodes) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const Episode* a, const Episode* b) {
    return a->start_sec < b->start_sec;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i - 1]->end_sec > order[i]->start_sec) {
      throw std::runtime_error("overlapping episodes for group '" + group + "' on " +
                               format_date_days(date_days));
    }
  }

  const std::int64_t day_start = date_days * kSecPerDay + std::int64_t{60} * span.start_minute;
  const std::int64_t step = std::int64_t{60} * delta_minutes;
  const std::size_t l = static_cast<std::size_t>(span_minutes / delta_minutes);

  Sequence seq;
  seq.group_id = group;
  seq.id = group + "_" + format_date_days(date_days);
  seq.date_days = date_days;
  seq.delta_minutes = delta_minutes;
  seq.states.assign(l, state_t{0});
  std::vector<bool> covered(l, false);

  // Episodes are disjoint, so per interval we scan the overlapping ones and
  // take the state with the largest covered time; ties break toward the
  // state covering the earliest instant of the interval.
  std::size_t cursor = 0;
  for (std::size_t j = 0; j < l; ++j) {
    const std::int64_t lo = day_start + static_cast<std::int64_t>(j) * step;
    const std::int64_t hi = lo + step;
    while (cursor < order.size() && order[cursor]->end_sec <= lo) ++cursor;
    std::int64_t best_cover = 0;
    std::int64_t best_first = 0;
    state_t best_state = 0;
    std::vector<std::int64_t> cover(alphabet.size(), 0);
    std::vector<std::int64_t> first_instant(alphabet.size(), hi);
    for (std::size_t k = cursor; k < order.size() && order[k]->start_sec < hi; ++k) {
      const std::int64_t a = std::max(order[k]->start_sec, lo);
      const std::int64_t b = std::min(order[k]->end_sec, hi);
      if (b <= a) continue;
      const state_t st = alphabet.index(order[k]->state);
      cover[st] += b - a;
      first_instant[st] = std::min(first_instant[st], a);
    }
    bool any = false;
    for (int st = 0; st < alphabet.size(); ++st) {
      if (cover[st] == 0) continue;
      if (!any || cover[st] > best_cover ||
          (cover[st] == best_cover && first_instant[st] < best_first)) {
        best_cover = cover[st];
        best_first = first_instant[st];
        best_state = static_cast<state_t>(st);
        any = true;
      }
    }
    if (any) {
      seq.states[j] = best_state;
      covered[j] = true;
    } else {
      seq.missing = true;
    }
  }

  if (seq.missing) {
    // Fill uncovered cells from the nearest preceding covered cell (or the
    // first covered one for a leading gap) so indices stay valid; the
    // `missing` flag is what downstream filtering acts on.
    std::ptrdiff_t first_covered = -1;
    for (std::size_t j = 0; j < l; ++j) {
      if (covered[j]) {
        first_covered = static_cast<std::ptrdiff_t>(j);
        break;
      }
    }
    if (first_covered < 0) {
      throw std::runtime_error("episodes for group '" + group + "' on " +
                               format_date_days(date_days) + " do not touch the day span");
    }
    for (std::ptrdiff_t j = 0; j < first_covered; ++j) {
      seq.states[static_cast<std::size_t>(j)] = seq.states[static_cast<std::size_t>(first_covered)];
    }
    for (std::size_t j = static_cast<std::size_t>(first_covered) + 1; j < l; ++j) {
      if (!covered[j]) seq.states[j] = seq.states[j - 1];
    }
  }
  return seq;
}

SequenceSet episodes_to_dataset(const std::vector<Episode>& episodes, const Alphabet& alphabet,
                                int delta_minutes, DaySpan span, int threads) {
  if (episodes.empty()) throw std::invalid_argument("no episodes");
  // Bucket by (group, date); groups ordered by first appearance, dates
  // ascending within each group.
  std::vector<std::string> group_order;
  std::unordered_map<std::string, std::map<std::int64_t, std::vector<Episode>>> buckets;
  for (const Episode& e : episodes) {
    auto [it, inserted] = buckets.try_emplace(e.group_id);
    if (inserted) group_order.push_back(e.group_id);
    it->second[e.date_days].push_back(e);
  }
  std::vector<const std::vector<Episode>*> days;
  for (const std::string& g : group_order) {
    for (const auto& [date, eps] : buckets.at(g)) days.push_back(&eps);
  }
  std::vector<Sequence> seqs(days.size());
  parallel_for(days.size(), [&](std::size_t i) {
    seqs[i] = episodes_to_sequence(*days[i], alphabet, delta_minutes, span);
  }, threads);
  return SequenceSet(alphabet, std::move(seqs));
}

SequenceSet map_states(const SequenceSet& set, const StateMapping& mapping,
                       const std::optional<Alphabet>& target) {
  const Alphabet& src = set.alphabet();
  std::unordered_map<std::string, std::string> lut;
  for (const auto& [from, to] : mapping.pairs) {
    if (!lut.emplace(from, to).second) {
      throw std::runtime_error("duplicate mapping for state '" + from + "'");
    }
  }
  // Target label per source index, and the target alphabet (first-appearance
  // order over the source alphabet unless given explicitly).
  std::vector<std::string> mapped(src.size());
  std::vector<std::string> target_labels;
  for (int i = 0; i < src.size(); ++i) {
    const std::string& from = src.label(static_cast<state_t>(i));
    auto it = lut.find(from);
    if (it == lut.end()) {
      throw std::runtime_error("state '" + from + "' has no mapping");
    }
    mapped[i] = it->second;
    if (std::find(target_labels.begin(), target_labels.end(), it->second) == target_labels.end()) {
      target_labels.push_back(it->second);
    }
  }
  Alphabet dst = target ? *target : Alphabet(target_labels);
  std::vector<state_t> index_map(src.size());
  for (int i = 0; i < src.size(); ++i) index_map[i] = dst.index(mapped[i]);

  std::vector<Sequence> out;
  out.reserve(set.size());
  for (const Sequence& s : set.sequences()) {
    Sequence t = s;
    for (state_t& st : t.states) st = index_map[st];
    out.push_back(std::move(t));
  }
  return SequenceSet(std::move(dst), std::move(out));
}

SequenceSet filter_dataset(const SequenceSet& set, const FilterRules& rules, FilterStats* stats) {
  if (rules.max_away_fraction < 0.0 || rules.max_away_fraction > 1.0) {
    throw std::invalid_argument("max_away_fraction must lie in [0, 1]");
  }
  if (rules.max_per_group < 0) throw std::invalid_argument("max_per_group must be >= 0");

  std::vector<bool> away(set.alphabet().size(), false);
  for (const std::string& label : rules.away_states) {
    away[set.alphabet().index(label)] = true;
  }
  const bool check_away = !rules.away_states.empty();

  FilterStats local;
  std::vector<std::size_t> keep;
  keep.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Sequence& s = set[i];
    if (rules.drop_missing && s.missing) {
      ++local.dropped_missing;
      continue;
    }
    if (check_away) {
      std::size_t count = 0;
      for (state_t st : s.states) count += away[st] ? 1 : 0;
      const double fraction = static_cast<double>(count) / static_cast<double>(s.states.size());
      if (fraction > rules.max_away_fraction) {
        ++local.dropped_away;
        continue;
      }
    }
    keep.push_back(i);
  }

  if (rules.max_per_group > 0) {
    // Uniform per-group sample via partial Fisher-Yates over each group's
    // surviving positions; retained sequences keep their original order.
    std::unordered_map<std::string, std::vector<std::size_t>> by_group;
    std::vector<std::string> group_order;
    for (std::size_t pos = 0; pos < keep.size(); ++pos) {
      const std::string& g = set[keep[pos]].group_id;
      auto [it, inserted] = by_group.try_emplace(g);
      if (inserted) group_order.push_back(g);
      it->second.push_back(pos);
    }
    std::vector<bool> selected(keep.size(), true);
    const std::size_t cap = static_cast<std::size_t>(rules.max_per_group);
    for (const std::string& g : group_order) {
      std::vector<std::size_t>& positions = by_group.at(g);
      if (positions.size() <= cap) continue;
      local.dropped_cap += static_cast<int>(positions.size() - cap);
      Rng rng(mix_seed(rules.seed, fnv1a(g)));
      for (std::size_t j = 0; j < cap; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(
            rng.next_below(static_cast<std::uint64_t>(positions.size() - j)));
        std::swap(positions[j], positions[pick]);
      }
      for (std::size_t j = cap; j < positions.size(); ++j) selected[positions[j]] = false;
    }
    std::vector<std::size_t> capped;
    capped.reserve(keep.size());
    for (std::size_t pos = 0; pos < keep.size(); ++pos) {
      if (selected[pos]) capped.push_back(keep[pos]);
    }
    keep = std::move(capped);
  }

  if (keep.empty()) throw std::runtime_error("filter removed every sequence");
  if (stats) *stats = local;

  std::vector<Sequence> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(set[i]);
  return SequenceSet(set.alphabet(), std::move(out));
}

SequenceSet concat_weeks(const SequenceSet& set, const std::vector<std::string>& weekday_names,
                         ConcatStats* stats) {
  if (weekday_names.empty()) throw std::invalid_argument("no weekdays requested");
  std::vector<int> want;
  want.reserve(weekday_names.size());
  for (const std::string& name : weekday_names) want.push_back(parse_weekday(name));

  std::vector<std::string> group_order;
  std::unordered_map<std::string, std::map<std::int64_t, const Sequence*>> by_group;
  for (const Sequence& s : set.sequences()) {
    if (s.date_days == kNoDate) {
      throw std::runtime_error("sequence '" + s.id + "' lacks a date; cannot build weeks");
    }
    auto [it, inserted] = by_group.try_emplace(s.group_id);
    if (inserted) group_order.push_back(s.group_id);
    if (!it->second.emplace(s.date_days, &s).second) {
      throw std::runtime_error("duplicate sequence for group '" + s.group_id + "' on " +
                               format_date_days(s.date_days));
    }
  }

  ConcatStats local;
  std::vector<Sequence> weeks;
  for (const std::string& g : group_order) {
    bool built = false;
    const auto& days = by_group.at(g);
    for (const auto& [date, first] : days) {
      if (weekday_mon0(date) != want[0]) continue;
      // The run must be on consecutive calendar dates matching the
      // requested weekday pattern.
      std::vector<const Sequence*> run{first};
      for (std::size_t k = 1; k < want.size(); ++k) {
        const std::int64_t next_date = date + static_cast<std::int64_t>(k);
        if (weekday_mon0(next_date) != want[k]) break;
        auto it = days.find(next_date);
        if (it == days.end()) break;
        run.push_back(it->second);
      }
      if (run.size() != want.size()) continue;
      Sequence week;
      week.group_id = g;
      week.id = g + "_" + format_date_days(date);
      week.date_days = date;
      week.delta_minutes = first->delta_minutes;
      week.states.reserve(run.size() * set.length());
      for (const Sequence* day : run) {
        week.missing = week.missing || day->missing;
        week.states.insert(week.states.end(), day->states.begin(), day->states.end());
      }
      weeks.push_back(std::move(week));
      built = true;
    }
    if (!built) ++local.groups_omitted;
  }
  local.weeks_built = static_cast<int>(weeks.size());
  if (stats) *stats = local;
  if (weeks.empty()) throw std::runtime_error("no group has a complete week run");
  return SequenceSet(set.alphabet(), std::move(weeks));
}

}  // namespace amdc
