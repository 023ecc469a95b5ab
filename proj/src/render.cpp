#include "amdc/render.hpp"

#include <cstdio>
#include <stdexcept>

namespace amdc {

namespace {

const std::map<std::string, std::string>& builtin_palette() {
  static const std::map<std::string, std::string> palette = {
      {"H", "#4C72B0"},  // home: blue
      {"W", "#DD8452"},  // work: orange
      {"T", "#55A868"},  // transport: green
      {"O", "#C44E52"},  // other: red
  };
  return palette;
}

const char* fallback_cycle(int index) {
  static const char* cycle[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52",
                                "#8172B3", "#937860", "#DA8BC3", "#8C8C8C",
                                "#CCB974", "#64B5CD"};
  return cycle[index % 10];
}

std::string one_decimal(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", x);
  return buf;
}

}  // namespace

std::string state_color(const Alphabet& alphabet, state_t state,
                        const std::map<std::string, std::string>& overrides) {
  const std::string& label = alphabet.label(state);
  if (auto it = overrides.find(label); it != overrides.end()) return it->second;
  if (auto it = builtin_palette().find(label); it != builtin_palette().end()) return it->second;
  return fallback_cycle(static_cast<int>(state));
}

std::vector<RenderedCluster> render_clusters(const SequenceSet& set,
                                             const std::vector<int>& assignments,
                                             const RenderOptions& options, std::vector<int>* skipped) {
  const std::size_t n = set.size();
  if (assignments.size() != n) throw std::invalid_argument("assignment length mismatch");
  int p = 0;
  for (int a : assignments) {
    if (a < 0) throw std::invalid_argument("negative cluster label");
    p = std::max(p, a + 1);
  }
  const int l = set.length();

  // Pre-resolve colors so each cell is a map-free lookup.
  std::vector<std::string> colors(static_cast<std::size_t>(set.alphabet().size()));
  for (int s = 0; s < set.alphabet().size(); ++s) {
    colors[static_cast<std::size_t>(s)] =
        state_color(set.alphabet(), static_cast<state_t>(s), options.palette);
  }

  const int header = 24;
  const int width = options.panel_width;
  const int height = options.panel_height;

  std::vector<RenderedCluster> out;
  for (int k = 0; k < p; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (assignments[i] == k) members.push_back(i);
    }
    if (members.empty()) {
      if (skipped) skipped->push_back(k);
      continue;
    }

    std::string svg;
    svg.reserve(members.size() * static_cast<std::size_t>(64));
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height + header) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height + header) + "\">\n";
    const double percent = 100.0 * static_cast<double>(members.size()) / static_cast<double>(n);
    svg += "  <text x=\"0\" y=\"16\" font-family=\"sans-serif\" font-size=\"14\">Cluster " +
           std::to_string(k) + " - " + std::to_string(members.size()) + " sequences (" +
           one_decimal(percent) + "%)</text>\n";

    // Rows live in sequence-index coordinates; the non-uniform viewBox
    // stretch normalizes row height so every panel is equally tall.
    svg += "  <svg x=\"0\" y=\"" + std::to_string(header) + "\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(l) +
           " " + std::to_string(members.size()) + "\" preserveAspectRatio=\"none\">\n";
    for (std::size_t row = 0; row < members.size(); ++row) {
      const Sequence& seq = set[members[row]];
      int start = 0;
      for (int j = 1; j <= l; ++j) {
        if (j < l && seq.states[static_cast<std::size_t>(j)] ==
                         seq.states[static_cast<std::size_t>(start)]) {
          continue;
        }
        svg += "    <rect x=\"" + std::to_string(start) + "\" y=\"" + std::to_string(row) +
               "\" width=\"" + std::to_string(j - start) + "\" height=\"1\" fill=\"" +
               colors[seq.states[static_cast<std::size_t>(start)]] + "\"/>\n";
        start = j;
      }
    }
    svg += "  </svg>\n";

    if (options.day_positions > 0 && l > options.day_positions && l % options.day_positions == 0) {
      const int days = l / options.day_positions;
      for (int d = 1; d < days; ++d) {
        // Separator in outer pixel coordinates so stroke width stays uniform.
        const double x = static_cast<double>(width) * d / days;
        svg += "  <line x1=\"" + one_decimal(x) + "\" y1=\"" + std::to_string(header) +
               "\" x2=\"" + one_decimal(x) + "\" y2=\"" + std::to_string(header + height) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
      }
    }
    svg += "</svg>\n";

    RenderedCluster rc;
    rc.cluster = k;
    rc.size = static_cast<int>(members.size());
    rc.svg = std::move(svg);
    out.push_back(std::move(rc));
  }
  return out;
}

}  // namespace amdc
