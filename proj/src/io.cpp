#include "ylg/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ylg::io {

namespace {

constexpr std::string_view kMagic = "YLGM1";

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::size_t parse_count(std::string_view token, const char* what) {
  std::size_t value = 0;
  if (token.empty()) throw std::invalid_argument(std::string("mask file: missing ") + what);
  for (char c : token) {
    if (c < '0' || c > '9')
      throw std::invalid_argument(std::string("mask file: bad ") + what);
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

}  // namespace

std::string write_mask_file(const MaskFile& file) {
  const PatternFactorization& f = file.factorization;
  std::string out;
  out += kMagic;
  out += '\n';
  out += to_string(f.name);
  out += ' ' + std::to_string(f.n_query());
  out += ' ' + std::to_string(f.n);
  out += ' ' + std::to_string(f.step_count());
  out += ' ' + std::to_string(f.stride);
  out += file.esa ? " 1" : " 0";
  if (file.esa) {
    out += ' ' + std::to_string(file.grid_height);
    out += ' ' + std::to_string(file.grid_width);
  }
  out += '\n';
  for (std::size_t s = 0; s < f.steps.size(); ++s) {
    if (s > 0) out += '\n';
    const AttentionMask& m = f.steps[s];
    for (std::size_t q = 0; q < m.n_query; ++q) {
      for (std::size_t k = 0; k < m.n_key; ++k) out += m.at(q, k) ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

MaskFile read_mask_file(std::string_view text) {
  std::vector<std::string_view> lines = split_lines(text);
  if (lines.empty() || lines[0] != kMagic)
    throw std::invalid_argument("mask file: bad magic");
  if (lines.size() < 2) throw std::invalid_argument("mask file: missing header");

  std::vector<std::string_view> tokens;
  {
    std::string_view header = lines[1];
    std::size_t pos = 0;
    while (pos < header.size()) {
      std::size_t space = header.find(' ', pos);
      if (space == std::string_view::npos) space = header.size();
      if (space > pos) tokens.push_back(header.substr(pos, space - pos));
      pos = space + 1;
    }
  }
  if (tokens.size() != 6 && tokens.size() != 8)
    throw std::invalid_argument("mask file: header must have 6 or 8 fields");

  MaskFile file;
  auto name = pattern_from_string(tokens[0]);
  if (!name) throw std::invalid_argument("mask file: unknown pattern name");
  std::size_t n_query = parse_count(tokens[1], "query count");
  std::size_t n_key = parse_count(tokens[2], "key count");
  std::size_t step_count = parse_count(tokens[3], "step count");
  std::size_t stride = parse_count(tokens[4], "stride");
  std::size_t esa_flag = parse_count(tokens[5], "esa flag");
  if (esa_flag > 1) throw std::invalid_argument("mask file: esa flag must be 0 or 1");
  if ((esa_flag == 1) != (tokens.size() == 8))
    throw std::invalid_argument("mask file: grid dims present iff esa flag set");
  if (n_query == 0 || n_key == 0 || step_count == 0)
    throw std::invalid_argument("mask file: counts must be positive");
  if (stride == 0 || stride > n_key)
    throw std::invalid_argument("mask file: stride must be in [1, n_key]");
  if (n_query % n_key != 0)
    throw std::invalid_argument("mask file: query count must be a multiple of key count");
  file.esa = esa_flag == 1;
  if (file.esa) {
    file.grid_height = parse_count(tokens[6], "grid height");
    file.grid_width = parse_count(tokens[7], "grid width");
    if (file.grid_height * file.grid_width != n_key)
      throw std::invalid_argument("mask file: grid dims must multiply to n_key");
  }

  file.factorization.name = *name;
  file.factorization.n = n_key;
  file.factorization.stride = stride;

  std::size_t line_idx = 2;
  for (std::size_t s = 0; s < step_count; ++s) {
    if (s > 0) {
      if (line_idx >= lines.size() || !lines[line_idx].empty())
        throw std::invalid_argument("mask file: steps must be separated by a blank line");
      ++line_idx;
    }
    std::size_t rows = (s + 1 == step_count) ? n_query : n_key;
    AttentionMask m(rows, n_key);
    for (std::size_t q = 0; q < rows; ++q, ++line_idx) {
      if (line_idx >= lines.size()) throw std::invalid_argument("mask file: truncated step");
      std::string_view row = lines[line_idx];
      if (row.size() != n_key)
        throw std::invalid_argument("mask file: row length must equal n_key");
      for (std::size_t k = 0; k < n_key; ++k) {
        if (row[k] == '1')
          m.set(q, k);
        else if (row[k] != '0')
          throw std::invalid_argument("mask file: rows must be '0'/'1'");
      }
    }
    file.factorization.steps.push_back(std::move(m));
  }
  if (line_idx != lines.size())
    throw std::invalid_argument("mask file: trailing content");
  return file;
}

void save_mask_file(const MaskFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::string text = write_mask_file(file);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MaskFile load_mask_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_mask_file(buf.str());
}

std::string to_pbm(const AttentionMask& mask) {
  std::string out = "P1\n";
  out += std::to_string(mask.n_key) + ' ' + std::to_string(mask.n_query) + '\n';
  for (std::size_t q = 0; q < mask.n_query; ++q) {
    for (std::size_t k = 0; k < mask.n_key; ++k) out += mask.at(q, k) ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string to_pgm(const SaliencyMap& s) {
  double max_w = 0.0;
  for (double w : s.weights) max_w = std::max(max_w, w);
  std::string out = "P2\n";
  out += std::to_string(s.width) + ' ' + std::to_string(s.height) + "\n255\n";
  for (std::size_t r = 0; r < s.height; ++r) {
    for (std::size_t c = 0; c < s.width; ++c) {
      if (c > 0) out += ' ';
      long level = max_w > 0.0 ? std::lround(255.0 * s.weights[r * s.width + c] / max_w) : 0;
      out += std::to_string(level);
    }
    out += '\n';
  }
  return out;
}

std::string to_dot(const InformationFlowGraph& g) {
  std::string out = "digraph ifg {\n  rankdir=LR;\n";
  for (std::size_t l = 0; l < g.layer_sizes.size(); ++l) {
    out += "  { rank=same;";
    for (std::size_t v = 0; v < g.layer_sizes[l]; ++v)
      out += " v" + std::to_string(l) + "_" + std::to_string(v) + ";";
    out += " }\n";
  }
  for (std::size_t s = 0; s < g.adj.size(); ++s)
    for (std::size_t u = 0; u < g.adj[s].size(); ++u)
      for (std::uint32_t v : g.adj[s][u])
        out += "  v" + std::to_string(s) + "_" + std::to_string(u) + " -> v" +
               std::to_string(s + 1) + "_" + std::to_string(v) + ";\n";
  out += "}\n";
  return out;
}

std::string to_adjacency_text(const InformationFlowGraph& g) {
  std::string out;
  for (std::size_t s = 0; s < g.adj.size(); ++s)
    for (std::size_t u = 0; u < g.adj[s].size(); ++u) {
      out += std::to_string(s) + ' ' + std::to_string(u) + ':';
      for (std::uint32_t v : g.adj[s][u]) out += ' ' + std::to_string(v);
      out += '\n';
    }
  return out;
}

nlohmann::json stats_report(const MaskFile& file) {
  const PatternFactorization& f = file.factorization;
  nlohmann::json report;
  report["name"] = std::string(to_string(f.name));
  report["n"] = f.n;
  report["n_query"] = f.n_query();
  report["stride"] = f.stride;
  report["esa"] = file.esa;
  if (file.esa) report["grid"] = {file.grid_height, file.grid_width};

  std::vector<std::size_t> counts;
  double capacity = 0.0;
  for (const auto& step : f.steps) {
    counts.push_back(step.count_true());
    capacity += static_cast<double>(step.n_query) * static_cast<double>(step.n_key);
  }
  std::size_t total = f.total_true();
  report["per_step_true_counts"] = counts;
  report["total_true"] = total;
  report["density"] = capacity > 0 ? static_cast<double>(total) / capacity : 0.0;
  report["sparsity_budget_ratio"] =
      static_cast<double>(total) / (static_cast<double>(f.n) * std::sqrt(static_cast<double>(f.n)));

  FactorizationCheck check = check_factorization(f);
  report["full_information"] = check.full;
  if (!check.full) {
    nlohmann::json witness;
    witness["source"] = check.witness.source;
    witness["target"] = check.witness.target;
    if (check.block) witness["block"] = *check.block;
    report["witness"] = witness;
  }
  return report;
}

}  // namespace ylg::io
