#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amdc/adjacency.hpp"
#include "amdc/baseline.hpp"
#include "amdc/benchmark.hpp"
#include "amdc/cluster.hpp"
#include "amdc/decomp.hpp"
#include "amdc/ingest.hpp"
#include "amdc/io.hpp"
#include "amdc/markov.hpp"
#include "amdc/parallel.hpp"
#include "amdc/render.hpp"
#include "amdc/stability.hpp"
#include "amdc/types.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace amdc;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kCatalogVersion = "v1";

/// Errors in how the tool was invoked (exit code 2, vs 1 for runtime ones).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_input(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("input file not found: " + path);
}

fs::path ensure_outdir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

/// "2:10" (inclusive range) or "2,4,6" (explicit list).
std::vector<int> parse_grid(const std::string& spec) {
  std::vector<int> out;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split_list(spec, ':');
    if (parts.size() != 2) throw UsageError("bad grid '" + spec + "', expected lo:hi");
    const int lo = std::stoi(parts[0]);
    const int hi = std::stoi(parts[1]);
    if (lo > hi) throw UsageError("bad grid '" + spec + "', expected lo <= hi");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  } else {
    for (const std::string& part : split_list(spec)) out.push_back(std::stoi(part));
  }
  if (out.empty()) throw UsageError("empty grid '" + spec + "'");
  return out;
}

std::optional<Alphabet> parse_alphabet(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  return Alphabet(split_list(spec));
}

/// "HH:MM-HH:MM=weight" entries into a weight vector for length-l sequences.
std::optional<WeightVector> parse_weights(const std::vector<std::string>& specs, int l,
                                          int delta_minutes) {
  if (specs.empty()) return std::nullopt;
  std::vector<WeightWindow> windows;
  for (const std::string& spec : specs) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos) {
      throw UsageError("bad weight '" + spec + "', expected HH:MM-HH:MM=value");
    }
    windows.push_back(parse_weight_window(spec.substr(0, eq), std::stod(spec.substr(eq + 1))));
  }
  return window_weights(windows, l, delta_minutes);
}

json json_number(double x) {
  // JSON has no literals for non-finite values; spell them out.
  if (std::isfinite(x)) return x;
  return format_double(x);
}

json json_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json json_metrics(const MetricReport& r) {
  return json{{"d_w", json_number(r.d_w)},  {"d_b", json_number(r.d_b)},
              {"D", json_number(r.D)},      {"wss", json_number(r.wss)},
              {"bss", json_number(r.bss)},  {"D_standard", json_number(r.D_standard)}};
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// Deterministic run manifest: effective options and produced files, no
/// clocks. Wall-clock stage times go to timings.json, the one artifact
/// exempt from byte-identical reruns.
void write_manifest(const fs::path& outdir, const std::string& command, const json& options,
                    std::vector<std::string> outputs) {
  outputs.push_back("manifest.json");
  std::sort(outputs.begin(), outputs.end());
  const json manifest = {{"command", command},
                         {"options", options},
                         {"outputs", outputs},
                         {"versions", {{"amdc", kVersion}, {"scenario_catalog", kCatalogVersion}}}};
  write_json_file(outdir / "manifest.json", manifest);
}

class StageTimer {
 public:
  void record(const std::string& stage, double seconds) { seconds_[stage] = seconds; }

  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    } else {
      auto result = fn();
      record(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return result;
    }
  }

  void write(const fs::path& outdir) const {
    write_json_file(outdir / "timings.json", json{{"seconds", seconds_}});
  }

 private:
  std::map<std::string, double> seconds_;
};

std::vector<std::string> write_svgs(const SequenceSet& set, const std::vector<int>& labels,
                                    const RenderOptions& options, const fs::path& outdir) {
  std::vector<int> skipped;
  const std::vector<RenderedCluster> rendered = render_clusters(set, labels, options, &skipped);
  for (int k : skipped) {
    std::cerr << "warning: cluster " << k << " is empty; no panel written\n";
  }
  std::vector<std::string> files;
  for (const RenderedCluster& rc : rendered) {
    const std::string name = "cluster_" + std::to_string(rc.cluster) + ".svg";
    write_text_file((outdir / name).string(), rc.svg);
    files.push_back(name);
  }
  return files;
}

std::vector<std::string> sequence_ids(const SequenceSet& set) {
  std::vector<std::string> ids;
  ids.reserve(set.size());
  for (const Sequence& s : set.sequences()) ids.push_back(s.id);
  return ids;
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
  std::string episodes, out, alphabet, span = "00:00-24:00";
  int delta = 5;
  std::vector<std::string> map_pairs;
  bool keep_missing = false;
  double max_away_fraction = 1.0;
  std::string away_states;
  int max_per_group = 0;
  std::uint64_t filter_seed = 0;
  std::string weeks;
};

int run_ingest(const IngestArgs& a) {
  require_input(a.episodes);
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  const std::vector<Episode> episodes =
      timer.time("read_episodes", [&] { return read_episodes_csv(a.episodes); });

  std::optional<Alphabet> alphabet = parse_alphabet(a.alphabet);
  if (!alphabet) {
    std::set<std::string> labels;
    for (const Episode& e : episodes) labels.insert(e.state);
    alphabet = Alphabet(std::vector<std::string>(labels.begin(), labels.end()));
  }

  const WeightWindow span = parse_weight_window(a.span, 1.0);
  if (span.end_minute <= span.start_minute) throw UsageError("day span must not wrap midnight");

  SequenceSet set = timer.time("build_sequences", [&] {
    return episodes_to_dataset(episodes, *alphabet, a.delta,
                               DaySpan{span.start_minute, span.end_minute});
  });

  if (!a.map_pairs.empty()) {
    StateMapping mapping;
    for (const std::string& pair : a.map_pairs) {
      const std::size_t eq = pair.find('=');
      if (eq == std::string::npos) throw UsageError("bad mapping '" + pair + "', expected from=to");
      mapping.pairs.emplace_back(pair.substr(0, eq), pair.substr(eq + 1));
    }
    set = map_states(set, mapping);
  }

  FilterRules rules;
  rules.drop_missing = !a.keep_missing;
  rules.max_away_fraction = a.max_away_fraction;
  if (!a.away_states.empty()) rules.away_states = split_list(a.away_states);
  rules.max_per_group = a.max_per_group;
  rules.seed = a.filter_seed;
  FilterStats fstats;
  set = filter_dataset(set, rules, &fstats);
  std::cout << "filtered: " << fstats.dropped_missing << " missing, " << fstats.dropped_away
            << " above away threshold, " << fstats.dropped_cap << " over group cap\n";

  if (!a.weeks.empty()) {
    ConcatStats cstats;
    set = concat_weeks(set, split_list(a.weeks), &cstats);
    std::cout << "weeks built: " << cstats.weeks_built << " (groups without a complete run: "
              << cstats.groups_omitted << ")\n";
  }

  timer.time("write_sequences", [&] { write_sequences_csv((outdir / "sequences.csv").string(), set); });
  std::cout << "sequences: " << set.size() << " x length " << set.length() << "\n";

  const json options = {{"episodes", a.episodes},
                        {"out", a.out},
                        {"delta", a.delta},
                        {"alphabet", alphabet->labels()},
                        {"span", a.span},
                        {"map", a.map_pairs},
                        {"keep_missing", a.keep_missing},
                        {"max_away_fraction", a.max_away_fraction},
                        {"away_states", a.away_states},
                        {"max_per_group", a.max_per_group},
                        {"filter_seed", a.filter_seed},
                        {"weeks", a.weeks}};
  write_manifest(outdir, "ingest", options, {"sequences.csv", "timings.json"});
  timer.write(outdir);
  return 0;
}

// --------------------------------------------------------------- cluster --

struct ClusterArgs {
  std::string input, out, alphabet;
  int delta = 5;
  std::string h_grid = "1:10", p_grid = "2:10";
  int restarts = 10;
  std::uint64_t seed = 0;
  std::vector<std::string> weights;
  bool no_render = false;
};

json model_json(const ClusterModel& model, const SvdFactors& factors, const Alphabet& alphabet) {
  json sv = json::array();
  for (Eigen::Index k = 0; k < factors.S.size(); ++k) sv.push_back(factors.S(k));
  json means = json::array();
  for (const Eigen::MatrixXd& t : model.cluster_means) means.push_back(json_matrix(t));
  std::vector<int> sizes(static_cast<std::size_t>(model.p), 0);
  for (int a : model.assignments) ++sizes[static_cast<std::size_t>(a)];
  return json{{"h", model.h},
              {"p", model.p},
              {"metrics", json_metrics(model.metrics)},
              {"degenerate", model.degenerate},
              {"restarts", model.restarts_used},
              {"seed", model.seed},
              {"alphabet", alphabet.labels()},
              {"cluster_sizes", sizes},
              {"singular_values", sv},
              {"rank", factors.rank},
              {"centers", json_matrix(model.centers)},
              {"cluster_means", means},
              {"grand_mean", json_matrix(model.grand_mean)}};
}

void write_cell_metrics(const fs::path& path, const std::vector<CellResult>& cells) {
  std::vector<std::string> rows;
  std::vector<std::vector<double>> values;
  std::vector<std::string> row_labels;
  for (const CellResult& cell : cells) {
    row_labels.push_back(std::to_string(cell.h) + "x" + std::to_string(cell.p));
    values.push_back({static_cast<double>(cell.h), static_cast<double>(cell.p), cell.metrics.d_w,
                      cell.metrics.d_b, cell.metrics.D, cell.metrics.wss, cell.metrics.bss,
                      cell.metrics.D_standard});
  }
  write_table_csv(path.string(), "cell", row_labels,
                  {"h", "p", "d_w", "d_b", "D", "wss", "bss", "D_standard"}, values);
}

int run_cluster(const ClusterArgs& a) {
  require_input(a.input);
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  const SequenceSet set = timer.time(
      "read_sequences", [&] { return read_sequences_csv(a.input, parse_alphabet(a.alphabet), a.delta); });

  FitOptions options;
  options.h_grid = parse_grid(a.h_grid);
  options.p_grid = parse_grid(a.p_grid);
  options.restarts = a.restarts;
  options.seed = a.seed;
  options.weights = parse_weights(a.weights, set.length(), a.delta);
  const FitResult fr = timer.time("fit", [&] { return fit(set, options); });
  timer.record("fit_prep", fr.prep_seconds);

  write_assignments_csv((outdir / "assignments.csv").string(), sequence_ids(set),
                        fr.model.assignments);
  write_json_file(outdir / "model.json", model_json(fr.model, fr.factors, set.alphabet()));
  write_cell_metrics(outdir / "metrics.csv", fr.cells);
  std::vector<std::string> outputs = {"assignments.csv", "model.json", "metrics.csv",
                                      "timings.json"};

  if (fr.model.degenerate) {
    std::cerr << "warning: no separation found in any grid cell; the partition is arbitrary\n";
  }
  std::cout << "selected h=" << fr.model.h << " p=" << fr.model.p
            << " D=" << format_double(fr.model.metrics.D) << "\n";

  if (!a.no_render && fr.model.p >= 1) {
    const auto files = timer.time("render", [&] {
      return write_svgs(set, fr.model.assignments, RenderOptions{}, outdir);
    });
    outputs.insert(outputs.end(), files.begin(), files.end());
  }

  const json options_json = {{"input", a.input},   {"out", a.out},
                             {"alphabet", a.alphabet}, {"delta", a.delta},
                             {"h_grid", a.h_grid}, {"p_grid", a.p_grid},
                             {"restarts", a.restarts}, {"seed", a.seed},
                             {"weights", a.weights},   {"no_render", a.no_render}};
  write_manifest(outdir, "cluster", options_json, outputs);
  timer.write(outdir);
  return 0;
}

// -------------------------------------------------------------- baseline --

struct BaselineArgs {
  std::string input, out, alphabet;
  int delta = 5;
  std::string p_grid = "2:10";
  bool emit_distance_matrix = false;
  bool no_render = false;
};

int run_baseline(const BaselineArgs& a) {
  require_input(a.input);
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  const SequenceSet set = timer.time(
      "read_sequences", [&] { return read_sequences_csv(a.input, parse_alphabet(a.alphabet), a.delta); });
  const std::vector<int> p_grid = parse_grid(a.p_grid);
  const HierFitResult hr = timer.time("fit", [&] { return hier_fit(set, p_grid, 0); });
  timer.record("fit_prep", hr.prep_seconds);

  write_assignments_csv((outdir / "assignments.csv").string(), sequence_ids(set), hr.assignments);

  json dunn = json::array();
  std::vector<std::string> row_labels;
  std::vector<std::vector<double>> rows;
  for (const auto& [p, value] : hr.dunn_values) {
    dunn.push_back({{"p", p}, {"dunn", json_number(value)}});
    row_labels.push_back(std::to_string(p));
    rows.push_back({static_cast<double>(p), value});
  }
  write_table_csv((outdir / "metrics.csv").string(), "cut", row_labels, {"p", "dunn"}, rows);
  write_json_file(outdir / "model.json", json{{"p", hr.p},
                                              {"degenerate", hr.degenerate},
                                              {"dunn_values", dunn},
                                              {"alphabet", set.alphabet().labels()}});
  std::vector<std::string> outputs = {"assignments.csv", "model.json", "metrics.csv",
                                      "timings.json"};

  if (hr.degenerate) {
    std::cerr << "warning: all pairwise distances are zero; the partition is arbitrary\n";
  }
  std::cout << "selected p=" << hr.p << "\n";

  if (a.emit_distance_matrix) {
    const DistanceMatrix dm = timer.time("distance_matrix", [&] { return distance_matrix(set, 0); });
    const std::vector<std::string> ids = sequence_ids(set);
    std::vector<std::vector<double>> drows(static_cast<std::size_t>(dm.size()));
    for (int i = 0; i < dm.size(); ++i) {
      drows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(dm.size()));
      for (int j = 0; j < dm.size(); ++j) drows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = dm(i, j);
    }
    write_table_csv((outdir / "distance_matrix.csv").string(), "id", ids, ids, drows);
    outputs.push_back("distance_matrix.csv");
  }

  if (!a.no_render) {
    const auto files = timer.time("render", [&] {
      return write_svgs(set, hr.assignments, RenderOptions{}, outdir);
    });
    outputs.insert(outputs.end(), files.begin(), files.end());
  }

  const json options_json = {{"input", a.input},
                             {"out", a.out},
                             {"alphabet", a.alphabet},
                             {"delta", a.delta},
                             {"p_grid", a.p_grid},
                             {"emit_distance_matrix", a.emit_distance_matrix},
                             {"no_render", a.no_render}};
  write_manifest(outdir, "baseline", options_json, outputs);
  timer.write(outdir);
  return 0;
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
  std::string scenario = "state:low";
  int n = 100, l = 200;
  std::uint64_t seed = 0;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  ScenarioSpec spec = parse_scenario(a.scenario);
  spec.n_sequences = a.n;
  spec.l = a.l;
  const GeneratedDataset data =
      timer.time("simulate", [&] { return generate_dataset(spec, a.seed, 0); });

  write_sequences_csv((outdir / "sequences.csv").string(), data.set);
  write_assignments_csv((outdir / "labels.csv").string(), sequence_ids(data.set), data.labels);
  std::cout << "simulated " << data.set.size() << " sequences of length " << data.set.length()
            << " from " << spec.name << " (" << spec.n_clusters << " clusters)\n";

  const json options = {{"scenario", a.scenario}, {"n", a.n}, {"l", a.l}, {"seed", a.seed},
                        {"out", a.out}};
  write_manifest(outdir, "simulate", options, {"sequences.csv", "labels.csv", "timings.json"});
  timer.write(outdir);
  return 0;
}

// ------------------------------------------------------------- benchmark --

struct BenchmarkArgs {
  std::string scenarios = "state:low";
  int replicates = 50;
  int n = 100, l = 200;
  int restarts = 10;
  std::string methods = "amdc,hier";
  std::uint64_t seed = 0;
  bool full_scale = false;
  std::string out;
};

int run_benchmark_cmd(const BenchmarkArgs& a, bool n_given, bool l_given, bool reps_given) {
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  int n = a.n, l = a.l, replicates = a.replicates;
  if (a.full_scale) {
    if (!n_given) n = 250;
    if (!l_given) l = 500;
    if (!reps_given) replicates = 500;
  }

  BenchmarkConfig config;
  for (const std::string& name : split_list(a.scenarios)) {
    ScenarioSpec spec = parse_scenario(name);
    // Equal mixture across clusters is a hard invariant, so round the
    // nominal size down to a multiple of this scenario's cluster count.
    spec.n_sequences = n - (n % spec.n_clusters);
    spec.l = l;
    config.scenarios.push_back(std::move(spec));
  }
  config.methods = split_list(a.methods);
  config.replicates = replicates;
  config.restarts = a.restarts;
  config.seed = a.seed;
  const BenchmarkResult result = timer.time("benchmark", [&] { return run_benchmark(config); });

  // results.csv: Table-1-style aggregate per scenario x method.
  {
    std::vector<std::string> row_labels;
    std::vector<std::vector<double>> rows;
    std::ofstream out(outdir / "results.csv", std::ios::binary);
    out << "scenario,method,replicates,accuracy_mean,accuracy_sd,mode_selected_p,failures\n";
    for (const MethodAggregate& agg : result.aggregates) {
      out << csv_escape(agg.scenario) << ',' << agg.method << ',' << agg.replicates << ','
          << format_double(agg.accuracy_mean) << ',' << format_double(agg.accuracy_sd) << ','
          << agg.mode_selected_p << ',' << agg.failures << "\n";
    }
    if (!out) throw std::runtime_error("failed writing results.csv");
  }
  // records.csv: per-replicate accuracies (timings live in timings.json).
  {
    std::ofstream out(outdir / "records.csv", std::ios::binary);
    out << "scenario,replicate,method,accuracy,selected_p,failed,error\n";
    for (const ReplicateRecord& rec : result.records) {
      out << csv_escape(rec.scenario) << ',' << rec.replicate << ',' << rec.method << ','
          << format_double(rec.accuracy) << ',' << rec.selected_p << ',' << (rec.failed ? 1 : 0)
          << ',' << csv_escape(rec.error) << "\n";
    }
    if (!out) throw std::runtime_error("failed writing records.csv");
  }
  for (const MethodAggregate& agg : result.aggregates) {
    timer.record(agg.scenario + "/" + agg.method + "/prep_mean", agg.prep_seconds_mean);
    timer.record(agg.scenario + "/" + agg.method + "/total_mean", agg.total_seconds_mean);
    std::cout << agg.scenario << " " << agg.method << ": accuracy "
              << format_double(agg.accuracy_mean) << " (sd " << format_double(agg.accuracy_sd)
              << "), mode p " << agg.mode_selected_p << ", failures " << agg.failures << "\n";
  }

  const json options = {{"scenarios", a.scenarios},
                        {"replicates", replicates},
                        {"n", n},
                        {"l", l},
                        {"restarts", a.restarts},
                        {"methods", a.methods},
                        {"seed", a.seed},
                        {"full_scale", a.full_scale},
                        {"out", a.out}};
  write_manifest(outdir, "benchmark", options, {"results.csv", "records.csv", "timings.json"});
  timer.write(outdir);
  return 0;
}

// ------------------------------------------------------------- stability --

struct StabilityArgs {
  std::string input, out, alphabet;
  int delta = 5;
  std::string h_grid = "1:10", p_grid = "2:10";
  int restarts = 10;
  std::uint64_t seed = 0;
  std::vector<std::string> weights;
  int B = 100;
  std::uint64_t boot_seed = 1;
};

int run_stability(const StabilityArgs& a) {
  require_input(a.input);
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  const SequenceSet set = timer.time(
      "read_sequences", [&] { return read_sequences_csv(a.input, parse_alphabet(a.alphabet), a.delta); });

  FitOptions options;
  options.h_grid = parse_grid(a.h_grid);
  options.p_grid = parse_grid(a.p_grid);
  options.restarts = a.restarts;
  options.seed = a.seed;
  options.weights = parse_weights(a.weights, set.length(), a.delta);
  const FitResult fr = timer.time("reference_fit", [&] { return fit(set, options); });
  if (fr.model.p < 2) throw std::runtime_error("reference fit is degenerate; nothing to score");

  const BootstrapResult boot =
      timer.time("bootstrap", [&] { return bootstrap_partitions(set, options, a.B, a.boot_seed); });
  const StabilityReport report = stability_report(fr.model.assignments, boot);

  {
    std::ofstream out(outdir / "stability.csv", std::ios::binary);
    out << "id,cluster,stability\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
      out << csv_escape(set[i].id) << ',' << fr.model.assignments[i] << ','
          << format_double(report.scores[i]) << "\n";
    }
    if (!out) throw std::runtime_error("failed writing stability.csv");
  }

  json clusters = json::array();
  for (std::size_t k = 0; k < report.cluster_mean.size(); ++k) {
    clusters.push_back({{"cluster", k},
                        {"mean", json_number(report.cluster_mean[k])},
                        {"median", json_number(report.cluster_median[k])}});
  }
  json p_counts = json::object();
  for (const auto& [p, count] : report.p_counts) p_counts[std::to_string(p)] = count;
  write_json_file(outdir / "summary.json",
                  json{{"B", a.B},
                       {"replicates_scored", report.B},
                       {"failures", report.failures},
                       {"reference", {{"h", fr.model.h}, {"p", fr.model.p}}},
                       {"overall", {{"mean", json_number(report.overall_mean)},
                                    {"median", json_number(report.overall_median)}}},
                       {"clusters", clusters},
                       {"selected_p", p_counts}});
  std::cout << "stability: mean " << format_double(report.overall_mean) << ", median "
            << format_double(report.overall_median) << " over " << report.B << " replicates ("
            << report.failures << " failed)\n";

  const json options_json = {{"input", a.input},   {"out", a.out},
                             {"alphabet", a.alphabet}, {"delta", a.delta},
                             {"h_grid", a.h_grid}, {"p_grid", a.p_grid},
                             {"restarts", a.restarts}, {"seed", a.seed},
                             {"weights", a.weights},   {"B", a.B},
                             {"boot_seed", a.boot_seed}};
  write_manifest(outdir, "stability", options_json,
                 {"stability.csv", "summary.json", "timings.json"});
  timer.write(outdir);
  return 0;
}

// --------------------------------------------------------------- contrib --

struct ContribArgs {
  std::string input, out, alphabet;
  int delta = 5;
  std::vector<std::string> weights;
};

int run_contrib(const ContribArgs& a) {
  require_input(a.input);
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  const SequenceSet set = timer.time(
      "read_sequences", [&] { return read_sequences_csv(a.input, parse_alphabet(a.alphabet), a.delta); });
  const std::optional<WeightVector> weights = parse_weights(a.weights, set.length(), a.delta);
  const DataMatrix centered = center(assemble(set, weights, 0));
  const SvdFactors factors = timer.time("svd", [&] { return decompose(centered); });
  const ContributionMatrix contrib = contributions(centered, factors);

  std::vector<std::string> col_labels;
  for (int k : contrib.columns) col_labels.push_back("sv" + std::to_string(k + 1));
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(contrib.C.rows()));
  for (Eigen::Index e = 0; e < contrib.C.rows(); ++e) {
    rows[static_cast<std::size_t>(e)].resize(static_cast<std::size_t>(contrib.C.cols()));
    for (Eigen::Index k = 0; k < contrib.C.cols(); ++k) {
      rows[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)] = contrib.C(e, k);
    }
  }
  write_table_csv((outdir / "contributions.csv").string(), "entry",
                  vec_entry_labels(set.alphabet()), col_labels, rows);
  std::cout << "wrote contributions for " << contrib.columns.size() << " singular directions\n";

  const json options = {{"input", a.input},
                        {"out", a.out},
                        {"alphabet", a.alphabet},
                        {"delta", a.delta},
                        {"weights", a.weights}};
  write_manifest(outdir, "contrib", options, {"contributions.csv", "timings.json"});
  timer.write(outdir);
  return 0;
}

// ---------------------------------------------------------------- render --

struct RenderArgs {
  std::string input, assignments, out, alphabet;
  int delta = 5;
  int width = 720, height = 160, day_positions = 288;
  std::vector<std::string> colors;
};

int run_render(const RenderArgs& a) {
  require_input(a.input);
  require_input(a.assignments);
  const fs::path outdir = ensure_outdir(a.out);
  StageTimer timer;

  const SequenceSet set = timer.time(
      "read_sequences", [&] { return read_sequences_csv(a.input, parse_alphabet(a.alphabet), a.delta); });
  const auto pairs = read_assignments_csv(a.assignments);
  std::map<std::string, int> by_id(pairs.begin(), pairs.end());
  std::vector<int> labels;
  labels.reserve(set.size());
  for (const Sequence& s : set.sequences()) {
    const auto it = by_id.find(s.id);
    if (it == by_id.end()) {
      throw std::runtime_error("no cluster assignment for sequence '" + s.id + "'");
    }
    labels.push_back(it->second);
  }

  RenderOptions options;
  options.panel_width = a.width;
  options.panel_height = a.height;
  options.day_positions = a.day_positions;
  for (const std::string& spec : a.colors) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("bad color '" + spec + "', expected state=#rrggbb");
    options.palette[spec.substr(0, eq)] = spec.substr(eq + 1);
  }
  const auto files = timer.time("render", [&] { return write_svgs(set, labels, options, outdir); });
  std::cout << "wrote " << files.size() << " cluster panels\n";

  std::vector<std::string> outputs = files;
  outputs.push_back("timings.json");
  const json options_json = {{"input", a.input},   {"assignments", a.assignments},
                             {"out", a.out},       {"alphabet", a.alphabet},
                             {"delta", a.delta},   {"width", a.width},
                             {"height", a.height}, {"day_positions", a.day_positions},
                             {"colors", a.colors}};
  write_manifest(outdir, "render", options_json, outputs);
  timer.write(outdir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjacency-matrix decomposition clustering for categorical sequences"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read defaults from a config file (CLI flags win)");
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap for all stages (0 = all cores)");

  std::function<int()> action;

  IngestArgs ingest_args;
  CLI::App* ingest = app.add_subcommand("ingest", "Episodes CSV to day/week sequences CSV");
  ingest->add_option("--episodes", ingest_args.episodes, "episodes.csv input")->required();
  ingest->add_option("--out", ingest_args.out, "Output directory")->required();
  ingest->add_option("--delta", ingest_args.delta, "Minutes per sequence position");
  ingest->add_option("--alphabet", ingest_args.alphabet, "Comma-separated state labels");
  ingest->add_option("--span", ingest_args.span, "Day window HH:MM-HH:MM");
  ingest->add_option("--map", ingest_args.map_pairs, "State mapping from=to (repeatable)");
  ingest->add_flag("--keep-missing", ingest_args.keep_missing, "Keep sequences with uncovered intervals");
  ingest->add_option("--max-away-fraction", ingest_args.max_away_fraction,
                     "Drop sequences with more than this fraction in --away-states");
  ingest->add_option("--away-states", ingest_args.away_states, "Comma-separated away states");
  ingest->add_option("--max-per-group", ingest_args.max_per_group, "Sequence cap per group (0 = off)");
  ingest->add_option("--filter-seed", ingest_args.filter_seed, "Seed for the per-group cap sampling");
  ingest->add_option("--weeks", ingest_args.weeks, "Weekday names to concatenate, e.g. Monday,...,Friday");
  ingest->callback([&] { action = [&] { return run_ingest(ingest_args); }; });

  ClusterArgs cluster_args;
  CLI::App* cluster = app.add_subcommand("cluster", "Fit the decomposition clustering pipeline");
  cluster->add_option("--input", cluster_args.input, "sequences.csv input")->required();
  cluster->add_option("--out", cluster_args.out, "Output directory")->required();
  cluster->add_option("--alphabet", cluster_args.alphabet, "Comma-separated state labels");
  cluster->add_option("--delta", cluster_args.delta, "Minutes per sequence position");
  cluster->add_option("--h-grid", cluster_args.h_grid, "Embedding dimensions, lo:hi or list");
  cluster->add_option("--p-grid", cluster_args.p_grid, "Cluster counts, lo:hi or list");
  cluster->add_option("--restarts", cluster_args.restarts, "k-means restarts per grid cell");
  cluster->add_option("--seed", cluster_args.seed, "Random seed");
  cluster->add_option("--weight", cluster_args.weights,
                      "Transition weight HH:MM-HH:MM=value (repeatable)");
  cluster->add_flag("--no-render", cluster_args.no_render, "Skip SVG heatmaps");
  cluster->callback([&] { action = [&] { return run_cluster(cluster_args); }; });

  BaselineArgs baseline_args;
  CLI::App* baseline = app.add_subcommand("baseline", "Levenshtein + hierarchical baseline");
  baseline->add_option("--input", baseline_args.input, "sequences.csv input")->required();
  baseline->add_option("--out", baseline_args.out, "Output directory")->required();
  baseline->add_option("--alphabet", baseline_args.alphabet, "Comma-separated state labels");
  baseline->add_option("--delta", baseline_args.delta, "Minutes per sequence position");
  baseline->add_option("--p-grid", baseline_args.p_grid, "Cluster counts, lo:hi or list");
  baseline->add_flag("--emit-distance-matrix", baseline_args.emit_distance_matrix,
                     "Also write the n x n distance matrix CSV");
  baseline->add_flag("--no-render", baseline_args.no_render, "Skip SVG heatmaps");
  baseline->callback([&] { action = [&] { return run_baseline(baseline_args); }; });

  SimulateArgs simulate_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Draw a dataset from a scenario");
  simulate->add_option("--scenario", simulate_args.scenario,
                       "state:<overlap> or duration:<overlap>:<varying>[:orderK]");
  simulate->add_option("--n", simulate_args.n, "Sequences (divisible by cluster count)");
  simulate->add_option("--l", simulate_args.l, "Sequence length");
  simulate->add_option("--seed", simulate_args.seed, "Random seed");
  simulate->add_option("--out", simulate_args.out, "Output directory")->required();
  simulate->callback([&] { action = [&] { return run_simulate(simulate_args); }; });

  BenchmarkArgs benchmark_args;
  CLI::App* benchmark = app.add_subcommand("benchmark", "Accuracy/timing comparison on scenarios");
  benchmark->add_option("--scenarios", benchmark_args.scenarios, "Comma-separated scenario names");
  CLI::Option* reps_opt =
      benchmark->add_option("--replicates", benchmark_args.replicates, "Datasets per scenario");
  CLI::Option* n_opt = benchmark->add_option(
      "--n", benchmark_args.n, "Sequences per dataset (rounded down to a cluster-count multiple)");
  CLI::Option* l_opt = benchmark->add_option("--l", benchmark_args.l, "Sequence length");
  benchmark->add_option("--restarts", benchmark_args.restarts, "k-means restarts per grid cell");
  benchmark->add_option("--methods", benchmark_args.methods, "Comma-separated: amdc,hier");
  benchmark->add_option("--seed", benchmark_args.seed, "Random seed");
  benchmark->add_flag("--full-scale", benchmark_args.full_scale,
                      "Paper-scale defaults: 500 replicates, n=250, l=500");
  benchmark->add_option("--out", benchmark_args.out, "Output directory")->required();
  benchmark->callback([&] {
    action = [&, reps_opt, n_opt, l_opt] {
      return run_benchmark_cmd(benchmark_args, n_opt->count() > 0, l_opt->count() > 0,
                               reps_opt->count() > 0);
    };
  });

  StabilityArgs stability_args;
  CLI::App* stability = app.add_subcommand("stability", "Bootstrap stability of the fitted model");
  stability->add_option("--input", stability_args.input, "sequences.csv input")->required();
  stability->add_option("--out", stability_args.out, "Output directory")->required();
  stability->add_option("--alphabet", stability_args.alphabet, "Comma-separated state labels");
  stability->add_option("--delta", stability_args.delta, "Minutes per sequence position");
  stability->add_option("--h-grid", stability_args.h_grid, "Embedding dimensions, lo:hi or list");
  stability->add_option("--p-grid", stability_args.p_grid, "Cluster counts, lo:hi or list");
  stability->add_option("--restarts", stability_args.restarts, "k-means restarts per grid cell");
  stability->add_option("--seed", stability_args.seed, "Fit seed (reference and replicates)");
  stability->add_option("--weight", stability_args.weights,
                        "Transition weight HH:MM-HH:MM=value (repeatable)");
  stability->add_option("--B", stability_args.B, "Bootstrap replicates");
  stability->add_option("--boot-seed", stability_args.boot_seed, "Resampling seed");
  stability->callback([&] { action = [&] { return run_stability(stability_args); }; });

  ContribArgs contrib_args;
  CLI::App* contrib = app.add_subcommand("contrib", "Entry contributions to singular directions");
  contrib->add_option("--input", contrib_args.input, "sequences.csv input")->required();
  contrib->add_option("--out", contrib_args.out, "Output directory")->required();
  contrib->add_option("--alphabet", contrib_args.alphabet, "Comma-separated state labels");
  contrib->add_option("--delta", contrib_args.delta, "Minutes per sequence position");
  contrib->add_option("--weight", contrib_args.weights,
                      "Transition weight HH:MM-HH:MM=value (repeatable)");
  contrib->callback([&] { action = [&] { return run_contrib(contrib_args); }; });

  RenderArgs render_args;
  CLI::App* render = app.add_subcommand("render", "SVG heatmaps from sequences + assignments");
  render->add_option("--input", render_args.input, "sequences.csv input")->required();
  render->add_option("--assignments", render_args.assignments, "assignments.csv input")->required();
  render->add_option("--out", render_args.out, "Output directory")->required();
  render->add_option("--alphabet", render_args.alphabet, "Comma-separated state labels");
  render->add_option("--delta", render_args.delta, "Minutes per sequence position");
  render->add_option("--width", render_args.width, "Panel width in pixels");
  render->add_option("--height", render_args.height, "Panel height in pixels");
  render->add_option("--day-positions", render_args.day_positions,
                     "Positions per day separator (0 = none)");
  render->add_option("--color", render_args.colors, "Palette override state=#rrggbb (repeatable)");
  render->callback([&] { action = [&] { return run_render(render_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  set_default_threads(threads);
  try {
    return action ? action() : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
