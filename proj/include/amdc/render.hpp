#pragma once

#include <map>
#include <string>
#include <vector>

#include "amdc/types.hpp"

namespace amdc {

struct RenderOptions {
  int panel_width = 720;   // pixels across the time axis
  int panel_height = 160;  // pixels of sequence rows per panel
  /// Draw a vertical separator every this many positions when the sequence
  /// length is a whole multiple (288 five-minute slots = one day); 0 turns
  /// separators off.
  int day_positions = 288;
  /// Label -> "#rrggbb" overrides on top of the built-in palette.
  std::map<std::string, std::string> palette;
};

/// Fill color for a state: the built-in palette for H/W/T/O, a stable
/// fallback cycle keyed on the state's alphabet index otherwise.
std::string state_color(const Alphabet& alphabet, state_t state,
                        const std::map<std::string, std::string>& overrides = {});

struct RenderedCluster {
  int cluster = 0;
  int size = 0;
  std::string svg;
};

/// One SVG heatmap per nonempty cluster: each sequence is a row of colored
/// cells (consecutive equal states merged into single rects), every panel
/// has the same pixel height regardless of member count, and the title
/// carries the cluster's share of all sequences. Empty clusters are skipped;
/// their labels are returned through `skipped` when given.
std::vector<RenderedCluster> render_clusters(const SequenceSet& set,
                                             const std::vector<int>& assignments,
                                             const RenderOptions& options = {},
                                             std::vector<int>* skipped = nullptr);

}  // namespace amdc
