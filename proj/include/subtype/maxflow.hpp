#ifndef SUBTYPE_MAXFLOW_HPP
#define SUBTYPE_MAXFLOW_HPP

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

namespace subtype {

// Directed flow network with residual arc pairs. Node 0..n-1; source and
// sink are ordinary node indices.
class FlowNetwork {
 public:
  struct Arc {
    uint32_t to;
    uint32_t rev;  // index of the reverse arc in adj_[to]
    double cap;    // residual capacity
  };

  explicit FlowNetwork(size_t n, uint32_t source, uint32_t sink)
      : adj_(n), source_(source), sink_(sink) {}

  size_t size() const { return adj_.size(); }
  uint32_t source() const { return source_; }
  uint32_t sink() const { return sink_; }

  void add_arc(uint32_t from, uint32_t to, double cap) {
    if (cap < 0.0) throw std::invalid_argument("negative capacity");
    adj_[from].push_back({to, static_cast<uint32_t>(adj_[to].size()), cap});
    adj_[to].push_back(
        {from, static_cast<uint32_t>(adj_[from].size()) - 1, 0.0});
  }

  const std::vector<Arc>& arcs(uint32_t v) const { return adj_[v]; }
  std::vector<Arc>& arcs(uint32_t v) { return adj_[v]; }

 private:
  std::vector<std::vector<Arc>> adj_;
  uint32_t source_;
  uint32_t sink_;
};

enum class CutSide : uint8_t { S, T };

struct MaxFlowResult {
  double flow_value = 0.0;
  // side of a minimum cut per node: S = residual-reachable from the source
  std::vector<CutSide> side;
};

// Highest-label push-relabel with the gap heuristic and periodic global
// relabeling. Mutates the network's residual capacities.
class PushRelabelSolver {
 public:
  explicit PushRelabelSolver(FlowNetwork& net) : net_(net) {}

  MaxFlowResult solve() {
    const size_t n = net_.size();
    const uint32_t s = net_.source();
    const uint32_t t = net_.sink();
    height_.assign(n, 0);
    excess_.assign(n, 0.0);
    current_.assign(n, 0);
    count_.assign(2 * n + 1, 0);
    buckets_.assign(2 * n + 1, {});
    in_bucket_.assign(n, false);
    relabels_since_global_ = 0;

    global_relabel();
    height_[s] = static_cast<uint32_t>(n);
    for (auto& a : net_.arcs(s)) {
      if (a.cap > 0.0) {
        double delta = a.cap;
        a.cap = 0.0;
        net_.arcs(a.to)[a.rev].cap += delta;
        excess_[a.to] += delta;
        excess_[s] -= delta;
      }
    }
    count_.assign(2 * n + 1, 0);
    for (uint32_t v = 0; v < n; ++v) count_[height_[v]]++;
    highest_ = 0;
    for (uint32_t v = 0; v < n; ++v) activate(v);

    while (true) {
      int32_t h = highest_active();
      if (h < 0) break;
      uint32_t v = buckets_[h].back();
      buckets_[h].pop_back();
      in_bucket_[v] = false;
      discharge(v);
      if (relabels_since_global_ >= n) {
        global_relabel();
        relabels_since_global_ = 0;
      }
    }

    MaxFlowResult result;
    result.flow_value = excess_[t];
    result.side.assign(n, CutSide::T);
    // source side = nodes reachable from s in the residual graph
    std::vector<uint32_t> stack = {s};
    result.side[s] = CutSide::S;
    while (!stack.empty()) {
      uint32_t v = stack.back();
      stack.pop_back();
      for (const auto& a : net_.arcs(v)) {
        if (a.cap > 0.0 && result.side[a.to] == CutSide::T) {
          result.side[a.to] = CutSide::S;
          stack.push_back(a.to);
        }
      }
    }
    if (result.side[t] == CutSide::S)
      throw std::logic_error("sink reachable from source after max flow");
    return result;
  }

 private:
  bool is_active(uint32_t v) const {
    return v != net_.source() && v != net_.sink() && excess_[v] > 0.0;
  }

  void activate(uint32_t v) {
    if (is_active(v) && !in_bucket_[v]) {
      in_bucket_[v] = true;
      buckets_[height_[v]].push_back(v);
      if (height_[v] > highest_) highest_ = height_[v];
    }
  }

  int32_t highest_active() {
    while (true) {
      while (highest_ > 0 && buckets_[highest_].empty()) --highest_;
      if (buckets_[highest_].empty()) return -1;
      uint32_t v = buckets_[highest_].back();
      if (height_[v] != highest_ || !is_active(v)) {
        // stale entry; re-bucket at the current height if still active
        buckets_[highest_].pop_back();
        in_bucket_[v] = false;
        activate(v);
        continue;
      }
      return static_cast<int32_t>(highest_);
    }
  }

  void discharge(uint32_t v) {
    const size_t n = net_.size();
    auto& arcs = net_.arcs(v);
    while (excess_[v] > 0.0) {
      if (current_[v] == arcs.size()) {
        relabel(v);
        if (height_[v] >= 2 * n) break;
        continue;
      }
      auto& a = arcs[current_[v]];
      if (a.cap > 0.0 && height_[v] == height_[a.to] + 1) {
        double delta = excess_[v] < a.cap ? excess_[v] : a.cap;
        a.cap -= delta;
        net_.arcs(a.to)[a.rev].cap += delta;
        excess_[v] -= delta;
        excess_[a.to] += delta;
        activate(a.to);
      } else {
        ++current_[v];
      }
    }
    activate(v);
  }

  void relabel(uint32_t v) {
    const size_t n = net_.size();
    uint32_t old = height_[v];
    uint32_t min_h = static_cast<uint32_t>(2 * n);
    for (const auto& a : net_.arcs(v)) {
      if (a.cap > 0.0 && height_[a.to] + 1 < min_h)
        min_h = height_[a.to] + 1;
    }
    count_[old]--;
    height_[v] = min_h;
    count_[min_h]++;
    current_[v] = 0;
    ++relabels_since_global_;
    // gap heuristic: nothing left at the old height below n means every
    // node strictly between old and n is cut off from the sink
    if (count_[old] == 0 && old < n) {
      for (uint32_t u = 0; u < n; ++u) {
        if (height_[u] > old && height_[u] < n) {
          count_[height_[u]]--;
          height_[u] = static_cast<uint32_t>(n + 1);
          count_[height_[u]]++;
        }
      }
    }
  }

  // Exact residual BFS distances: to the sink for nodes that can reach it,
  // n + distance-to-source for the rest.
  void global_relabel() {
    const size_t n = net_.size();
    const uint32_t s = net_.source();
    const uint32_t t = net_.sink();
    std::vector<uint32_t> dist(n, static_cast<uint32_t>(2 * n));
    std::queue<uint32_t> q;
    dist[t] = 0;
    q.push(t);
    while (!q.empty()) {
      uint32_t u = q.front();
      q.pop();
      for (const auto& a : net_.arcs(u)) {
        // residual arc a.to -> u exists iff the reverse arc has capacity
        if (net_.arcs(a.to)[a.rev].cap > 0.0 && dist[a.to] > dist[u] + 1 &&
            a.to != s) {
          dist[a.to] = dist[u] + 1;
          q.push(a.to);
        }
      }
    }
    std::vector<uint32_t> dist_s(n, static_cast<uint32_t>(n));
    dist_s[s] = 0;
    q.push(s);
    while (!q.empty()) {
      uint32_t u = q.front();
      q.pop();
      for (const auto& a : net_.arcs(u)) {
        if (net_.arcs(a.to)[a.rev].cap > 0.0 &&
            dist_s[a.to] > dist_s[u] + 1) {
          dist_s[a.to] = dist_s[u] + 1;
          q.push(a.to);
        }
      }
    }
    count_.assign(2 * n + 1, 0);
    for (uint32_t v = 0; v < n; ++v) {
      if (v == s) {
        height_[v] = static_cast<uint32_t>(n);
      } else if (dist[v] < 2 * n) {
        height_[v] = dist[v];
      } else {
        height_[v] = static_cast<uint32_t>(n) + dist_s[v];
      }
      count_[height_[v]]++;
      current_[v] = 0;
    }
    for (auto& b : buckets_) b.clear();
    in_bucket_.assign(n, false);
    highest_ = 0;
    for (uint32_t v = 0; v < n; ++v) activate(v);
  }

  FlowNetwork& net_;
  std::vector<uint32_t> height_;
  std::vector<double> excess_;
  std::vector<size_t> current_;
  std::vector<uint32_t> count_;
  std::vector<std::vector<uint32_t>> buckets_;
  std::vector<bool> in_bucket_;
  uint32_t highest_ = 0;
  size_t relabels_since_global_ = 0;
};

inline MaxFlowResult push_relabel_maxflow(FlowNetwork& net) {
  return PushRelabelSolver(net).solve();
}

}  // namespace subtype

#endif
