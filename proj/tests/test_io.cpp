#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "amdc/ingest.hpp"
#include "amdc/io.hpp"
#include "amdc/rng.hpp"
#include "amdc/types.hpp"
#include "helpers.hpp"

using namespace amdc;
using testutil::seq_of;
using testutil::set_of;

namespace {

std::string tmp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "amdc_io_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("doubles format as their shortest round-trip decimal") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.25) == "-2.25");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");

  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const double x = (rng.next_double() - 0.5) * std::pow(10.0, static_cast<double>(rng.next_below(40)) - 20.0);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("csv escaping round-trips through the line splitter") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");

  const std::vector<std::string> fields = {"plain", "a,b", "say \"hi\"", "", "trail "};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += csv_escape(fields[i]);
  }
  CHECK(split_csv_line(line) == fields);

  CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
}

TEST_CASE("single-character alphabets round-trip in narrow form") {
  const Alphabet ab({"A", "B"});
  const SequenceSet set = set_of({"ABAB", "BBAA", "AABB"}, ab);
  const std::string path = tmp_path("narrow.csv");
  write_sequences_csv(path, set);

  const std::string text = read_text_file(path);
  CHECK(text == "id,group_id,states\ns1,s1,ABAB\ns2,s2,BBAA\ns3,s3,AABB\n");

  const SequenceSet back = read_sequences_csv(path);
  CHECK(back.alphabet().labels() == std::vector<std::string>{"A", "B"});  // inferred, sorted
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].id == set[i].id);
    CHECK(back[i].group_id == set[i].group_id);
    CHECK(back[i].states == set[i].states);
    CHECK(back[i].date_days == kNoDate);
    CHECK_FALSE(back[i].missing);
  }

  const SequenceSet forced = read_sequences_csv(path, Alphabet({"B", "A", "C"}));
  CHECK(forced[0].states == std::vector<state_t>{1, 0, 1, 0});
}

TEST_CASE("multi-character alphabets round-trip in wide form") {
  const Alphabet ab({"xx", "aa"});
  std::vector<Sequence> seqs;
  Sequence s;
  s.id = "r1";
  s.group_id = "g";
  s.states = {0, 1, 0};
  seqs.push_back(s);
  const std::string path = tmp_path("wide.csv");
  write_sequences_csv(path, SequenceSet(ab, seqs));

  CHECK(read_text_file(path) == "id,group_id,s1,s2,s3\nr1,g,xx,aa,xx\n");

  // Inferred alphabet sorts labels, re-indexing states consistently.
  const SequenceSet inferred = read_sequences_csv(path);
  CHECK(inferred.alphabet().labels() == std::vector<std::string>{"aa", "xx"});
  CHECK(inferred[0].states == std::vector<state_t>{1, 0, 1});

  // A declared alphabet keeps its own order.
  const SequenceSet declared = read_sequences_csv(path, ab);
  CHECK(declared[0].states == std::vector<state_t>{0, 1, 0});
}

TEST_CASE("date and missing columns appear only when used") {
  const Alphabet ab({"A", "B"});
  std::vector<Sequence> seqs;
  Sequence a = seq_of("AB", ab, "a");
  a.date_days = parse_date_days("2026-03-02");
  a.missing = true;
  Sequence b = seq_of("BA", ab, "b");
  seqs.push_back(a);
  seqs.push_back(b);

  const std::string path = tmp_path("dated.csv");
  write_sequences_csv(path, SequenceSet(ab, seqs));
  CHECK(read_text_file(path) ==
        "id,group_id,date,missing,states\na,a,2026-03-02,1,AB\nb,b,,0,BA\n");

  const SequenceSet back = read_sequences_csv(path);
  CHECK(back[0].date_days == parse_date_days("2026-03-02"));
  CHECK(back[0].missing);
  CHECK(back[1].date_days == kNoDate);
  CHECK_FALSE(back[1].missing);
}

TEST_CASE("malformed sequence files are rejected with the path named") {
  const std::string path = tmp_path("bad.csv");

  write_text_file(path, "id,states\nx,AB\n");
  CHECK_THROWS_WITH_AS(read_sequences_csv(path), doctest::Contains(path.c_str()), std::runtime_error);

  write_text_file(path, "id,group_id,states\n");
  CHECK_THROWS_AS(read_sequences_csv(path), std::runtime_error);

  write_text_file(path, "id,group_id,states\nx,g,AB,extra\n");
  CHECK_THROWS_AS(read_sequences_csv(path), std::runtime_error);

  write_text_file(path, "id,group_id,s1,s3\nx,g,A,B\n");
  CHECK_THROWS_AS(read_sequences_csv(path), std::runtime_error);

  // ragged lengths violate the uniform-length invariant
  write_text_file(path, "id,group_id,states\nx,g,AB\ny,g,ABA\n");
  CHECK_THROWS(read_sequences_csv(path));

  // unknown label under a declared alphabet
  write_text_file(path, "id,group_id,states\nx,g,AC\n");
  CHECK_THROWS(read_sequences_csv(path, Alphabet({"A", "B"})));

  CHECK_THROWS_WITH_AS(read_sequences_csv(tmp_path("does_not_exist.csv")),
                       doctest::Contains("does_not_exist"), std::runtime_error);
}

TEST_CASE("assignments round-trip, including awkward ids") {
  const std::string path = tmp_path("assignments.csv");
  const std::vector<std::string> ids = {"plain", "with,comma", "with \"quote\""};
  write_assignments_csv(path, ids, {0, 2, 1});

  const auto back = read_assignments_csv(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0] == std::pair<std::string, int>{"plain", 0});
  CHECK(back[1] == std::pair<std::string, int>{"with,comma", 2});
  CHECK(back[2] == std::pair<std::string, int>{"with \"quote\"", 1});

  CHECK_THROWS_AS(write_assignments_csv(path, ids, {0, 1}), std::invalid_argument);

  write_text_file(path, "id,label\nx,0\n");
  CHECK_THROWS_AS(read_assignments_csv(path), std::runtime_error);
  write_text_file(path, "id,cluster\nx,zero\n");
  CHECK_THROWS_AS(read_assignments_csv(path), std::runtime_error);
}

TEST_CASE("episode files parse into typed records") {
  const std::string path = tmp_path("episodes.csv");
  write_text_file(path,
                  "group_id,date,start_iso8601,end_iso8601,state\n"
                  "g1,2026-03-02,2026-03-02T00:00,2026-03-02T08:30,H\n"
                  "g1,2026-03-02,2026-03-02T08:30,2026-03-02T24:00,W\n");
  const std::vector<Episode> eps = read_episodes_csv(path);
  REQUIRE(eps.size() == 2);
  CHECK(eps[0].group_id == "g1");
  CHECK(eps[0].date_days == parse_date_days("2026-03-02"));
  CHECK(eps[0].start_sec == parse_date_days("2026-03-02") * 86400);
  CHECK(eps[0].end_sec - eps[0].start_sec == 8 * 3600 + 30 * 60);
  CHECK(eps[0].state == "H");
  CHECK(eps[1].state == "W");

  write_text_file(path, "group,date,start,end,state\n");
  CHECK_THROWS_AS(read_episodes_csv(path), std::runtime_error);
  write_text_file(path, "group_id,date,start_iso8601,end_iso8601,state\n");
  CHECK_THROWS_AS(read_episodes_csv(path), std::runtime_error);
}

TEST_CASE("numeric tables write labels, columns, and shortest doubles") {
  const std::string path = tmp_path("table.csv");
  write_table_csv(path, "metric", {"row,1", "row2"}, {"a", "b"},
                  {{1.5, std::numeric_limits<double>::infinity()}, {0.25, -3.0}});
  CHECK(read_text_file(path) == "metric,a,b\n\"row,1\",1.5,inf\nrow2,0.25,-3\n");

  CHECK_THROWS_AS(write_table_csv(path, "m", {"r"}, {"a"}, {{1.0, 2.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(write_table_csv(path, "m", {"r", "s"}, {"a"}, {{1.0}}),
                  std::invalid_argument);
}

TEST_CASE("text files round-trip bytes") {
  const std::string path = tmp_path("text.bin");
  const std::string content = "line1\nline2\twith tab\n";
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
}

}  // TEST_SUITE
