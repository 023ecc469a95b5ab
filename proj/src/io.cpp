#include "amdc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "amdc/ingest.hpp"

namespace amdc {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

/// Reads one logical CSV record, honouring quoted fields that span lines.
bool read_csv_record(std::istream& in, std::string& record) {
  record.clear();
  std::string line;
  bool got = false;
  bool in_quotes = false;
  while (std::getline(in, line)) {
    got = true;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!record.empty()) record.push_back('\n');
    record += line;
    for (char c : line) {
      if (c == '"') in_quotes = !in_quotes;
    }
    if (!in_quotes) break;
  }
  return got;
}

int parse_int(const std::string& s, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error(std::string("invalid ") + what + " '" + s + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<Episode> read_episodes_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string record;
  if (!read_csv_record(in, record)) throw std::runtime_error("'" + path + "' is empty");
  const std::vector<std::string> header = split_csv_line(record);
  const std::vector<std::string> expected = {"group_id", "date", "start_iso8601",
                                             "end_iso8601", "state"};
  if (header != expected) {
    throw std::runtime_error("'" + path +
                             "': expected header group_id,date,start_iso8601,end_iso8601,state");
  }
  std::vector<Episode> episodes;
  std::size_t lineno = 1;
  while (read_csv_record(in, record)) {
    ++lineno;
    if (record.empty()) continue;
    const std::vector<std::string> f = split_csv_line(record);
    if (f.size() != 5) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) +
                               ": expected 5 fields, got " + std::to_string(f.size()));
    }
    Episode e;
    e.group_id = f[0];
    e.date_days = parse_date_days(f[1]);
    e.start_sec = parse_datetime_sec(f[2]);
    e.end_sec = parse_datetime_sec(f[3]);
    e.state = f[4];
    episodes.push_back(std::move(e));
  }
  if (episodes.empty()) throw std::runtime_error("'" + path + "' contains no episodes");
  return episodes;
}

SequenceSet read_sequences_csv(const std::string& path, const std::optional<Alphabet>& alphabet,
                               int delta_minutes) {
  std::ifstream in = open_input(path);
  std::string record;
  if (!read_csv_record(in, record)) throw std::runtime_error("'" + path + "' is empty");
  const std::vector<std::string> header = split_csv_line(record);
  if (header.size() < 3 || header[0] != "id" || header[1] != "group_id") {
    throw std::runtime_error("'" + path + "': header must start with id,group_id");
  }
  std::size_t col = 2;
  std::ptrdiff_t date_col = -1, missing_col = -1;
  if (col < header.size() && header[col] == "date") date_col = static_cast<std::ptrdiff_t>(col++);
  if (col < header.size() && header[col] == "missing")
    missing_col = static_cast<std::ptrdiff_t>(col++);
  bool narrow;
  std::size_t wide_l = 0;
  if (col < header.size() && header[col] == "states" && col + 1 == header.size()) {
    narrow = true;
  } else if (col < header.size() && header[col] == "s1") {
    narrow = false;
    wide_l = header.size() - col;
    for (std::size_t j = 0; j < wide_l; ++j) {
      if (header[col + j] != "s" + std::to_string(j + 1)) {
        throw std::runtime_error("'" + path + "': wide header must run s1,...,sl");
      }
    }
  } else {
    throw std::runtime_error("'" + path + "': expected a states column or s1,...,sl columns");
  }

  struct Row {
    Sequence seq;
    std::vector<std::string> raw;  // labels (wide) or one chars-string (narrow)
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (read_csv_record(in, record)) {
    ++lineno;
    if (record.empty()) continue;
    const std::vector<std::string> f = split_csv_line(record);
    if (f.size() != header.size()) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(f.size()));
    }
    Row row;
    row.seq.id = f[0];
    row.seq.group_id = f[1];
    row.seq.delta_minutes = delta_minutes;
    if (date_col >= 0 && !f[static_cast<std::size_t>(date_col)].empty()) {
      row.seq.date_days = parse_date_days(f[static_cast<std::size_t>(date_col)]);
    }
    if (missing_col >= 0) {
      row.seq.missing = parse_int(f[static_cast<std::size_t>(missing_col)], "missing flag") != 0;
    }
    if (narrow) {
      row.raw.push_back(f[col]);
    } else {
      row.raw.assign(f.begin() + static_cast<std::ptrdiff_t>(col), f.end());
      if (row.raw.size() != wide_l) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) +
                                 ": wrong state count");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("'" + path + "' contains no sequences");

  Alphabet ab;
  if (alphabet) {
    ab = *alphabet;
  } else {
    std::set<std::string> labels;
    for (const Row& row : rows) {
      if (narrow) {
        for (char c : row.raw[0]) labels.insert(std::string(1, c));
      } else {
        labels.insert(row.raw.begin(), row.raw.end());
      }
    }
    ab = Alphabet(std::vector<std::string>(labels.begin(), labels.end()));
  }

  std::vector<Sequence> seqs;
  seqs.reserve(rows.size());
  for (Row& row : rows) {
    if (narrow) {
      const std::string& chars = row.raw[0];
      row.seq.states.reserve(chars.size());
      for (char c : chars) row.seq.states.push_back(ab.index(std::string(1, c)));
    } else {
      row.seq.states.reserve(row.raw.size());
      for (const std::string& label : row.raw) row.seq.states.push_back(ab.index(label));
    }
    seqs.push_back(std::move(row.seq));
  }
  return SequenceSet(std::move(ab), std::move(seqs));
}

void write_sequences_csv(const std::string& path, const SequenceSet& set) {
  const Alphabet& ab = set.alphabet();
  const bool narrow = ab.single_char();
  bool any_date = false, any_missing = false;
  for (const Sequence& s : set.sequences()) {
    any_date = any_date || s.date_days != kNoDate;
    any_missing = any_missing || s.missing;
  }
  std::ofstream out = open_output(path);
  out << "id,group_id";
  if (any_date) out << ",date";
  if (any_missing) out << ",missing";
  if (narrow) {
    out << ",states";
  } else {
    for (int j = 1; j <= set.length(); ++j) out << ",s" << j;
  }
  out << "\n";
  for (const Sequence& s : set.sequences()) {
    out << csv_escape(s.id) << ',' << csv_escape(s.group_id);
    if (any_date) {
      out << ',';
      if (s.date_days != kNoDate) out << format_date_days(s.date_days);
    }
    if (any_missing) out << ',' << (s.missing ? 1 : 0);
    if (narrow) {
      out << ',';
      for (state_t st : s.states) out << ab.label(st);
    } else {
      for (state_t st : s.states) out << ',' << csv_escape(ab.label(st));
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<std::pair<std::string, int>> read_assignments_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string record;
  if (!read_csv_record(in, record)) throw std::runtime_error("'" + path + "' is empty");
  if (split_csv_line(record) != std::vector<std::string>{"id", "cluster"}) {
    throw std::runtime_error("'" + path + "': expected header id,cluster");
  }
  std::vector<std::pair<std::string, int>> out;
  std::size_t lineno = 1;
  while (read_csv_record(in, record)) {
    ++lineno;
    if (record.empty()) continue;
    const std::vector<std::string> f = split_csv_line(record);
    if (f.size() != 2) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) +
                               ": expected 2 fields");
    }
    out.emplace_back(f[0], parse_int(f[1], "cluster label"));
  }
  if (out.empty()) throw std::runtime_error("'" + path + "' contains no assignments");
  return out;
}

void write_assignments_csv(const std::string& path, const std::vector<std::string>& ids,
                           const std::vector<int>& labels) {
  if (ids.size() != labels.size()) {
    throw std::invalid_argument("ids and labels must have equal length");
  }
  std::ofstream out = open_output(path);
  out << "id,cluster\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << csv_escape(ids[i]) << ',' << labels[i] << "\n";
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_table_csv(const std::string& path, const std::string& corner,
                     const std::vector<std::string>& row_labels,
                     const std::vector<std::string>& col_labels,
                     const std::vector<std::vector<double>>& rows) {
  if (row_labels.size() != rows.size()) {
    throw std::invalid_argument("row label count does not match row count");
  }
  std::ofstream out = open_output(path);
  out << csv_escape(corner);
  for (const std::string& c : col_labels) out << ',' << csv_escape(c);
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != col_labels.size()) {
      throw std::invalid_argument("row width does not match column label count");
    }
    out << csv_escape(row_labels[i]);
    for (double v : rows[i]) out << ',' << format_double(v);
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_output(path);
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace amdc
