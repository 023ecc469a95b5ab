#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amdc/types.hpp"

namespace amdc {

/// Shortest round-trip decimal form of `x` ("inf"/"nan" spelled out).
std::string format_double(double x);

std::string csv_escape(const std::string& field);
std::vector<std::string> split_csv_line(const std::string& line);

/// episodes.csv: `group_id,date,start_iso8601,end_iso8601,state`
std::vector<Episode> read_episodes_csv(const std::string& path);

/// sequences.csv, auto-detected by header:
///   narrow  `id,group_id[,date][,missing],states`  states = l-char string
///   wide    `id,group_id[,date][,missing],s1,...,sl`
/// With no declared alphabet the labels are inferred from the data in sorted
/// order. `delta_minutes` is metadata not stored in the file.
SequenceSet read_sequences_csv(const std::string& path,
                               const std::optional<Alphabet>& alphabet = std::nullopt,
                               int delta_minutes = 5);

/// Writes the narrow form when every label is a single character, else the
/// wide form. Emits the optional `date` / `missing` columns only when some
/// sequence carries that metadata.
void write_sequences_csv(const std::string& path, const SequenceSet& set);

/// assignments.csv: `id,cluster` with 0-based cluster labels.
std::vector<std::pair<std::string, int>> read_assignments_csv(const std::string& path);
void write_assignments_csv(const std::string& path, const std::vector<std::string>& ids,
                           const std::vector<int>& labels);

/// Generic labeled numeric table; `corner` is the header of the label column.
void write_table_csv(const std::string& path, const std::string& corner,
                     const std::vector<std::string>& row_labels,
                     const std::vector<std::string>& col_labels,
                     const std::vector<std::vector<double>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace amdc
