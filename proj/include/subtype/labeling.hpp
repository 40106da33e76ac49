#ifndef SUBTYPE_LABELING_HPP
#define SUBTYPE_LABELING_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "subtype/cdr.hpp"
#include "subtype/maxflow.hpp"
#include "subtype/naive_bayes.hpp"

namespace subtype {

// Binary labeling energy: sum of per-node data costs plus lambda-weighted
// disagreement costs over directed social edges.
struct LabelingProblem {
  std::vector<UserId> users;              // node index -> user id
  std::vector<std::pair<double, double>> data_cost;  // (D(0), D(1)) in nats
  std::vector<std::pair<uint32_t, uint32_t>> social_edges;
  std::vector<uint32_t> k_out;            // per node
  // experimental: symmetric per-edge disagreement weights (e.g. call counts)
  // replacing the reciprocal out-degree rule when non-empty
  std::vector<double> edge_weight_override;
  double lambda = 100.0;
  bool lambda_infinite = false;           // lambda = +inf regime
  std::vector<std::optional<SubscriptionLabel>> fixed;

  size_t node_count() const { return users.size(); }
};

struct LabelingSolution {
  std::vector<SubscriptionLabel> label;
  double energy = 0.0;
  double flow_value = 0.0;
};

// D(f) = -ln P(f | x) with posteriors already clamped to [1e-10, 1-1e-10].
inline std::pair<double, double> data_cost(const Posterior& p) {
  auto check = [](double v) {
    if (v < kPosteriorClamp || v > 1.0 - kPosteriorClamp)
      throw std::invalid_argument("posterior outside clamp range");
  };
  check(p.p_prepaid);
  check(p.p_postpaid);
  return {-std::log(p.p_prepaid), -std::log(p.p_postpaid)};
}

// Modified Ising disagreement cost: zero for equal labels, otherwise the
// reciprocal out-degree of the postpaid-labeled endpoint.
inline double smoothness_cost(SubscriptionLabel f_u, SubscriptionLabel f_v,
                              uint32_t k_out_u, uint32_t k_out_v) {
  if (f_u == f_v) return 0.0;
  uint32_t k = f_v == SubscriptionLabel::Postpaid ? k_out_v : k_out_u;
  if (k == 0)
    throw std::invalid_argument("k_out = 0 for the postpaid endpoint");
  return 1.0 / k;
}

namespace detail {

// Per-edge arc weights (u->v, v->u); edges whose required k_out is zero
// contribute only the defined direction.
inline std::pair<double, double> edge_weights(const LabelingProblem& p,
                                              size_t edge_index) {
  if (!p.edge_weight_override.empty()) {
    double w = p.edge_weight_override[edge_index];
    return {w, w};
  }
  auto [u, v] = p.social_edges[edge_index];
  double wu = p.k_out[u] > 0 ? 1.0 / p.k_out[u] : 0.0;  // cost of (1,0)
  double wv = p.k_out[v] > 0 ? 1.0 / p.k_out[v] : 0.0;  // cost of (0,1)
  return {wu, wv};
}

inline double finite_capacity_sum(const LabelingProblem& p) {
  double sum = 0.0;
  for (const auto& [d0, d1] : p.data_cost) sum += d0 + d1;
  if (!p.lambda_infinite) {
    for (size_t i = 0; i < p.social_edges.size(); ++i) {
      auto [wu, wv] = edge_weights(p, i);
      sum += p.lambda * (wu + wv);
    }
  }
  return sum;
}

}  // namespace detail

// A capacity no finite cut can exceed; stands in for +inf.
inline double infinite_sentinel(const LabelingProblem& p) {
  return detail::finite_capacity_sum(p) + 1.0;
}

// Total energy of a full assignment.
inline double labeling_energy(const LabelingProblem& p,
                              const std::vector<SubscriptionLabel>& label) {
  double e = 0.0;
  for (size_t u = 0; u < p.node_count(); ++u)
    e += label[u] == SubscriptionLabel::Prepaid ? p.data_cost[u].first
                                                : p.data_cost[u].second;
  if (p.lambda == 0.0 && !p.lambda_infinite) return e;
  for (size_t i = 0; i < p.social_edges.size(); ++i) {
    auto [u, v] = p.social_edges[i];
    if (label[u] == label[v]) continue;
    auto [wu, wv] = detail::edge_weights(p, i);
    double w = label[u] == SubscriptionLabel::Postpaid ? wu : wv;
    if (w > 0.0 && p.lambda_infinite)
      return std::numeric_limits<double>::infinity();
    e += p.lambda * w;
  }
  return e;
}

// s-t reduction: arc s->u carries D_u(0), arc u->t carries D_u(1); each
// social edge (u,v) adds u->v at lambda/k_out(u) and v->u at lambda/k_out(v).
// Fixing a label saturates the opposite labeling arc with the sentinel.
// Node layout: user nodes 0..n-1, source n, sink n+1.
inline FlowNetwork build_labeling_network(const LabelingProblem& p) {
  const uint32_t n = static_cast<uint32_t>(p.node_count());
  const uint32_t s = n;
  const uint32_t t = n + 1;
  const double inf = infinite_sentinel(p);
  FlowNetwork net(n + 2, s, t);
  for (uint32_t u = 0; u < n; ++u) {
    double cap_s = p.data_cost[u].first;   // cut when u is labeled prepaid
    double cap_t = p.data_cost[u].second;  // cut when u is labeled postpaid
    if (u < p.fixed.size() && p.fixed[u].has_value()) {
      if (*p.fixed[u] == SubscriptionLabel::Postpaid)
        cap_s = inf;  // s-link may never be cut -> u stays on the S side
      else
        cap_t = inf;
    }
    net.add_arc(s, u, cap_s);
    net.add_arc(u, t, cap_t);
  }
  for (size_t i = 0; i < p.social_edges.size(); ++i) {
    auto [u, v] = p.social_edges[i];
    auto [wu, wv] = detail::edge_weights(p, i);
    double cap_uv = p.lambda_infinite ? (wu > 0 ? inf : 0.0) : p.lambda * wu;
    double cap_vu = p.lambda_infinite ? (wv > 0 ? inf : 0.0) : p.lambda * wv;
    if (cap_uv > 0.0) net.add_arc(u, v, cap_uv);
    if (cap_vu > 0.0) net.add_arc(v, u, cap_vu);
  }
  return net;
}

// Min-cut labeling: T-side nodes have their s-link cut and are prepaid,
// S-side nodes have their t-link cut and are postpaid, so the cut capacity
// equals the energy of the induced labeling.
inline LabelingSolution solve_labeling(const LabelingProblem& p) {
  FlowNetwork net = build_labeling_network(p);
  MaxFlowResult flow = push_relabel_maxflow(net);
  if (flow.flow_value > detail::finite_capacity_sum(p) + 0.5)
    throw std::invalid_argument(
        "flow exceeds every finite cut: contradictory fixed labels");
  LabelingSolution sol;
  sol.flow_value = flow.flow_value;
  sol.label.resize(p.node_count());
  for (size_t u = 0; u < p.node_count(); ++u)
    sol.label[u] = flow.side[u] == CutSide::S ? SubscriptionLabel::Postpaid
                                              : SubscriptionLabel::Prepaid;
  sol.energy = labeling_energy(p, sol.label);
  return sol;
}

// Exhaustive oracle over all assignments consistent with the fixed labels.
// Ties break toward the assignment encountered first in enumeration order
// (node 0 = lowest bit, label 0 preferred).
inline LabelingSolution brute_force_labeling(const LabelingProblem& p) {
  const size_t n = p.node_count();
  if (n > 20) throw std::invalid_argument("brute force limited to 20 nodes");
  LabelingSolution best;
  best.energy = std::numeric_limits<double>::infinity();
  std::vector<SubscriptionLabel> label(n);
  for (uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    bool consistent = true;
    for (size_t u = 0; u < n; ++u) {
      label[u] = (mask >> u) & 1 ? SubscriptionLabel::Postpaid
                                 : SubscriptionLabel::Prepaid;
      if (u < p.fixed.size() && p.fixed[u].has_value() &&
          *p.fixed[u] != label[u]) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    double e = labeling_energy(p, label);
    if (e < best.energy) {
      best.energy = e;
      best.label = label;
    }
  }
  if (best.label.empty() && n > 0)
    throw std::invalid_argument("no assignment consistent with fixed labels");
  best.flow_value = best.energy;
  return best;
}

// Fixes a node's label when its own posterior and its neighborhood's mean
// posterior both clear the thresholds (strict inequalities). Neighbors are
// the union of in- and out-neighbors; isolated nodes are never fixed.
inline std::unordered_map<uint32_t, SubscriptionLabel> prune_fix_labels(
    const std::vector<Posterior>& posteriors, const CallGraph& graph,
    double tau1 = 0.85, double tau2 = 0.65) {
  if (!(tau1 > 0.5 && tau1 <= 1.0 && tau2 > 0.5 && tau2 <= 1.0))
    throw std::invalid_argument("tau1, tau2 must lie in (0.5, 1]");
  std::unordered_map<uint32_t, SubscriptionLabel> fixed;
  for (uint32_t u = 0; u < graph.node_count(); ++u) {
    const Posterior& pu = posteriors[u];
    SubscriptionLabel l = pu.p_postpaid > pu.p_prepaid
                              ? SubscriptionLabel::Postpaid
                              : SubscriptionLabel::Prepaid;
    double own = l == SubscriptionLabel::Postpaid ? pu.p_postpaid
                                                  : pu.p_prepaid;
    if (!(own > tau1)) continue;
    auto nbrs = graph.neighbors(u);
    if (nbrs.empty()) continue;
    double sum = 0.0;
    for (uint32_t v : nbrs)
      sum += l == SubscriptionLabel::Postpaid ? posteriors[v].p_postpaid
                                              : posteriors[v].p_prepaid;
    if (sum / nbrs.size() > tau2) fixed[u] = l;
  }
  return fixed;
}

}  // namespace subtype

#endif
