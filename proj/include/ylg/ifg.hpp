#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ylg/mask.hpp"
#include "ylg/matrix.hpp"

namespace ylg {

// Multipartite DAG modelling how token information can propagate through
// the steps of a sparsification. Layer 0 holds the input tokens; an edge
// u -> v in step i exists iff step mask i lets output position v attend
// input position u (information flows from the attended token to the
// attending one).
struct InformationFlowGraph {
  std::vector<std::size_t> layer_sizes;                       // p + 1 entries
  std::vector<std::vector<std::vector<std::uint32_t>>> adj;   // adj[step][u] = ascending targets

  std::size_t step_count() const { return adj.size(); }
  std::size_t edge_count(std::size_t step) const;
  std::size_t total_edges() const;
};

struct Witness {
  std::size_t source = 0;
  std::size_t target = 0;
  bool operator==(const Witness&) const = default;
};

struct FullInformationResult {
  bool full = false;
  Witness witness;  // lexicographically smallest unreachable pair when !full
};

struct EdgeStats {
  std::vector<std::size_t> edges_per_step;
  std::size_t total_edges = 0;
  double density = 0.0;  // total / sum over steps of |V^i|*|V^{i+1}|
};

// Square factorizations only (apply any ESA transform first, expand after).
InformationFlowGraph build_ifg(const PatternFactorization& f);

// Layers (n, 1, n): every input feeds one hub which feeds every output.
InformationFlowGraph star_topology(std::size_t n);

// True iff every layer-0 node reaches every final-layer node. Per-source
// frontier propagation; sources scanned in parallel under Exec::Parallel
// with identical results.
FullInformationResult full_information(const InformationFlowGraph& g, Exec exec = Exec::Parallel);

// reach[source][target] over layer 0 x final layer.
std::vector<std::vector<bool>> reachable_matrix(const InformationFlowGraph& g,
                                                Exec exec = Exec::Parallel);

// Max simultaneous unit flow from the two sources (layer 0) to the two
// targets (final layer) with unit capacity on every edge and every node
// (vertex splitting). Value 2 certifies the graph can serve both pairs at
// once; always <= 2.
int pair_flow(const InformationFlowGraph& g, std::pair<std::size_t, std::size_t> sources,
              std::pair<std::size_t, std::size_t> targets);

EdgeStats edge_stats(const InformationFlowGraph& g);

// Full-information verdict for any factorization. Square ones are checked
// directly; a non-square-expanded one passes iff every n-key-row block of
// the final step, combined with the earlier steps, passes. `block` is set
// to the first failing block for expanded factorizations.
struct FactorizationCheck {
  bool full = false;
  Witness witness;
  std::optional<std::size_t> block;
};

FactorizationCheck check_factorization(const PatternFactorization& f, Exec exec = Exec::Parallel);

}  // namespace ylg
