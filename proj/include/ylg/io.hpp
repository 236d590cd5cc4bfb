#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ylg/ifg.hpp"
#include "ylg/inversion.hpp"
#include "ylg/mask.hpp"

#include "json.hpp"

namespace ylg::io {

// Text container for a factorization. Layout, byte-exact:
//   line 1: magic "YLGM1"
//   line 2: <name> <n_query> <n_key> <step_count> <stride> <esa>[ <grid_h> <grid_w>]
//   body:   one '0'/'1' line per mask row, n_key chars each; steps separated
//           by a single blank line. Steps before the last have n_key rows;
//           the last step has n_query rows.
struct MaskFile {
  PatternFactorization factorization;
  bool esa = false;
  std::size_t grid_height = 0;
  std::size_t grid_width = 0;

  bool operator==(const MaskFile&) const = default;
};

std::string write_mask_file(const MaskFile& file);
MaskFile read_mask_file(std::string_view text);  // throws std::invalid_argument

void save_mask_file(const MaskFile& file, const std::filesystem::path& path);
MaskFile load_mask_file(const std::filesystem::path& path);

// PBM P1: header "P1\n<w> <h>\n", then one packed '0'/'1' line per row,
// '1' (black) at attended positions.
std::string to_pbm(const AttentionMask& mask);

// PGM P2, weights scaled so the max weight maps to 255.
std::string to_pgm(const SaliencyMap& s);

// DOT digraph; one node per token copy, layers pinned to ranks.
std::string to_dot(const InformationFlowGraph& g);

// One "layer u: v v v" line per node.
std::string to_adjacency_text(const InformationFlowGraph& g);

// name, n, stride, per-step true counts, total, density, full-information
// verdict (+ witness when false) and total/(n*sqrt(n)) budget ratio.
nlohmann::json stats_report(const MaskFile& file);

}  // namespace ylg::io
