#include "ylg/ifg.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

namespace ylg {

std::size_t InformationFlowGraph::edge_count(std::size_t step) const {
  std::size_t c = 0;
  for (const auto& targets : adj[step]) c += targets.size();
  return c;
}

std::size_t InformationFlowGraph::total_edges() const {
  std::size_t c = 0;
  for (std::size_t s = 0; s < adj.size(); ++s) c += edge_count(s);
  return c;
}

InformationFlowGraph build_ifg(const PatternFactorization& f) {
  if (f.steps.empty()) throw std::invalid_argument("build_ifg: empty factorization");
  const std::size_t n = f.n;
  for (const auto& step : f.steps)
    if (!step.square() || step.n_query != n)
      throw std::invalid_argument("build_ifg: steps must all be square with side n");

  InformationFlowGraph g;
  g.layer_sizes.assign(f.steps.size() + 1, n);
  g.adj.resize(f.steps.size());
  for (std::size_t s = 0; s < f.steps.size(); ++s) {
    const AttentionMask& m = f.steps[s];
    g.adj[s].resize(n);
    // edge u -> v iff output v attends input u
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t u = 0; u < n; ++u)
        if (m.at(v, u)) g.adj[s][u].push_back(static_cast<std::uint32_t>(v));
    for (auto& targets : g.adj[s]) std::sort(targets.begin(), targets.end());
  }
  return g;
}

InformationFlowGraph star_topology(std::size_t n) {
  if (n == 0) throw std::invalid_argument("star_topology: n must be at least 1");
  InformationFlowGraph g;
  g.layer_sizes = {n, 1, n};
  g.adj.resize(2);
  g.adj[0].assign(n, {0});
  g.adj[1].resize(1);
  for (std::size_t v = 0; v < n; ++v) g.adj[1][0].push_back(static_cast<std::uint32_t>(v));
  return g;
}

namespace {

// Frontier propagation from one layer-0 node; returns reached flags over the
// final layer.
void reach_from(const InformationFlowGraph& g, std::size_t source, std::vector<std::uint8_t>& cur,
                std::vector<std::uint8_t>& next, std::vector<std::uint8_t>& out) {
  cur.assign(g.layer_sizes.front(), 0);
  cur[source] = 1;
  for (std::size_t step = 0; step < g.adj.size(); ++step) {
    next.assign(g.layer_sizes[step + 1], 0);
    for (std::size_t u = 0; u < g.adj[step].size(); ++u)
      if (cur[u])
        for (std::uint32_t v : g.adj[step][u]) next[v] = 1;
    cur.swap(next);
  }
  out = cur;
}

}  // namespace

std::vector<std::vector<bool>> reachable_matrix(const InformationFlowGraph& g, Exec exec) {
  const std::size_t n0 = g.layer_sizes.front();
  const std::size_t np = g.layer_sizes.back();
  std::vector<std::vector<bool>> reach(n0, std::vector<bool>(np, false));
  const std::int64_t sources = static_cast<std::int64_t>(n0);
#pragma omp parallel if (exec == Exec::Parallel)
  {
    std::vector<std::uint8_t> cur, next, out;
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < sources; ++s) {
      reach_from(g, static_cast<std::size_t>(s), cur, next, out);
      for (std::size_t t = 0; t < np; ++t) reach[static_cast<std::size_t>(s)][t] = out[t] != 0;
    }
  }
  return reach;
}

FullInformationResult full_information(const InformationFlowGraph& g, Exec exec) {
  const std::size_t n0 = g.layer_sizes.front();
  const std::size_t np = g.layer_sizes.back();
  constexpr std::size_t kAllReached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> first_missing(n0, kAllReached);
  const std::int64_t sources = static_cast<std::int64_t>(n0);
#pragma omp parallel if (exec == Exec::Parallel)
  {
    std::vector<std::uint8_t> cur, next, out;
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < sources; ++s) {
      reach_from(g, static_cast<std::size_t>(s), cur, next, out);
      for (std::size_t t = 0; t < np; ++t)
        if (!out[t]) {
          first_missing[static_cast<std::size_t>(s)] = t;
          break;
        }
    }
  }
  for (std::size_t s = 0; s < n0; ++s)
    if (first_missing[s] != kAllReached) return {false, {s, first_missing[s]}};
  return {true, {}};
}

namespace {

// Unit-capacity max flow on the vertex-split graph, Edmonds-Karp. Node ids:
// 2*k is the in-copy and 2*k+1 the out-copy of graph node k; the last two
// ids are the super source and sink.
struct FlowNet {
  struct Edge {
    int to;
    int cap;
    int rev;
  };
  std::vector<std::vector<Edge>> adj;

  explicit FlowNet(std::size_t nodes) : adj(nodes) {}

  void add_edge(int from, int to) {
    adj[from].push_back({to, 1, static_cast<int>(adj[to].size())});
    adj[to].push_back({from, 0, static_cast<int>(adj[from].size()) - 1});
  }

  int max_flow(int source, int sink) {
    int flow = 0;
    while (true) {
      std::vector<int> prev_node(adj.size(), -1), prev_edge(adj.size(), -1);
      std::queue<int> queue;
      queue.push(source);
      prev_node[source] = source;
      while (!queue.empty() && prev_node[sink] < 0) {
        int u = queue.front();
        queue.pop();
        for (std::size_t i = 0; i < adj[u].size(); ++i) {
          const Edge& e = adj[u][i];
          if (e.cap > 0 && prev_node[e.to] < 0) {
            prev_node[e.to] = u;
            prev_edge[e.to] = static_cast<int>(i);
            queue.push(e.to);
          }
        }
      }
      if (prev_node[sink] < 0) return flow;
      for (int v = sink; v != source; v = prev_node[v]) {
        Edge& e = adj[prev_node[v]][prev_edge[v]];
        e.cap -= 1;
        adj[v][e.rev].cap += 1;
      }
      ++flow;
    }
  }
};

}  // namespace

int pair_flow(const InformationFlowGraph& g, std::pair<std::size_t, std::size_t> sources,
              std::pair<std::size_t, std::size_t> targets) {
  if (sources.first == sources.second || targets.first == targets.second)
    throw std::invalid_argument("pair_flow: sources and targets must each be distinct");
  if (sources.first >= g.layer_sizes.front() || sources.second >= g.layer_sizes.front() ||
      targets.first >= g.layer_sizes.back() || targets.second >= g.layer_sizes.back())
    throw std::invalid_argument("pair_flow: node index out of range");

  std::vector<std::size_t> layer_base(g.layer_sizes.size(), 0);
  for (std::size_t l = 1; l < g.layer_sizes.size(); ++l)
    layer_base[l] = layer_base[l - 1] + g.layer_sizes[l - 1];
  std::size_t node_count = layer_base.back() + g.layer_sizes.back();

  FlowNet net(2 * node_count + 2);
  const int super_source = static_cast<int>(2 * node_count);
  const int super_sink = super_source + 1;
  auto in_id = [&](std::size_t layer, std::size_t v) {
    return static_cast<int>(2 * (layer_base[layer] + v));
  };
  auto out_id = [&](std::size_t layer, std::size_t v) { return in_id(layer, v) + 1; };

  for (std::size_t k = 0; k < node_count; ++k)
    net.add_edge(static_cast<int>(2 * k), static_cast<int>(2 * k + 1));
  for (std::size_t step = 0; step < g.adj.size(); ++step)
    for (std::size_t u = 0; u < g.adj[step].size(); ++u)
      for (std::uint32_t v : g.adj[step][u]) net.add_edge(out_id(step, u), in_id(step + 1, v));

  net.add_edge(super_source, in_id(0, sources.first));
  net.add_edge(super_source, in_id(0, sources.second));
  net.add_edge(out_id(g.layer_sizes.size() - 1, targets.first), super_sink);
  net.add_edge(out_id(g.layer_sizes.size() - 1, targets.second), super_sink);

  return net.max_flow(super_source, super_sink);
}

EdgeStats edge_stats(const InformationFlowGraph& g) {
  EdgeStats stats;
  double pair_capacity = 0.0;
  for (std::size_t s = 0; s < g.adj.size(); ++s) {
    stats.edges_per_step.push_back(g.edge_count(s));
    stats.total_edges += stats.edges_per_step.back();
    pair_capacity +=
        static_cast<double>(g.layer_sizes[s]) * static_cast<double>(g.layer_sizes[s + 1]);
  }
  stats.density = pair_capacity > 0 ? static_cast<double>(stats.total_edges) / pair_capacity : 0.0;
  return stats;
}

FactorizationCheck check_factorization(const PatternFactorization& f, Exec exec) {
  if (f.steps.empty()) throw std::invalid_argument("check_factorization: empty factorization");
  if (f.square()) {
    FullInformationResult r = full_information(build_ifg(f), exec);
    return {r.full, r.witness, std::nullopt};
  }
  const AttentionMask& last = f.steps.back();
  if (last.n_query % f.n != 0)
    throw std::invalid_argument("check_factorization: expanded query count not a multiple of n");
  std::size_t blocks = last.n_query / f.n;
  for (std::size_t b = 0; b < blocks; ++b) {
    PatternFactorization piece = f;
    AttentionMask block(f.n, f.n);
    std::copy(last.bits.begin() + b * f.n * f.n, last.bits.begin() + (b + 1) * f.n * f.n,
              block.bits.begin());
    piece.steps.back() = std::move(block);
    FullInformationResult r = full_information(build_ifg(piece), exec);
    if (!r.full) return {false, r.witness, b};
  }
  return {true, {}, std::nullopt};
}

}  // namespace ylg
