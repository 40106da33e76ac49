#ifndef SUBTYPE_CROSSNET_HPP
#define SUBTYPE_CROSSNET_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "subtype/adaboost.hpp"
#include "subtype/cdr.hpp"
#include "subtype/features.hpp"
#include "subtype/metrics.hpp"
#include "subtype/naive_bayes.hpp"
#include "subtype/rng.hpp"

namespace subtype {

// Company side A (labels known) vs external side B (labels unknown), with
// directed inter-company call ties. Edges are stored per direction as dense
// index pairs.
struct BipartiteGraph {
  std::vector<UserId> a_ids;
  std::vector<UserId> b_ids;
  std::vector<SubscriptionLabel> a_labels;            // parallel to a_ids
  std::vector<std::pair<uint32_t, uint32_t>> ab_edges;  // (a, b), A called B
  std::vector<std::pair<uint32_t, uint32_t>> ba_edges;  // (b, a), B called A

  double postpaid_balance() const {
    if (a_labels.empty()) return 0.5;
    size_t post = 0;
    for (auto l : a_labels)
      if (l == SubscriptionLabel::Postpaid) ++post;
    return static_cast<double>(post) / a_labels.size();
  }

  double mean_b_in_degree() const {
    return b_ids.empty() ? 0.0
                         : static_cast<double>(ab_edges.size()) / b_ids.size();
  }

  // fraction of undirected inter-company ties present in both directions
  double bidirectional_fraction() const {
    std::unordered_set<uint64_t> ab, pairs;
    ab.reserve(ab_edges.size());
    for (auto [a, b] : ab_edges) {
      ab.insert((static_cast<uint64_t>(a) << 32) | b);
      pairs.insert((static_cast<uint64_t>(a) << 32) | b);
    }
    size_t bidir = 0;
    for (auto [b, a] : ba_edges) {
      uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
      if (ab.count(key)) ++bidir;
      pairs.insert(key);
    }
    return pairs.empty() ? 0.0 : static_cast<double>(bidir) / pairs.size();
  }
};

struct PropagationResult {
  std::vector<SubscriptionLabel> b_labels;     // from the first realization
  std::vector<SubscriptionLabel> a_recovered;  // from the first realization
  double a_accuracy = 0.0;
  double accuracy_std = 0.0;
  size_t realizations = 0;
  std::vector<double> per_realization;
  size_t scored_a_users = 0;  // A users with at least one incoming B tie
};

// Majority label of the in-neighbors given per-source labels; exact ties and
// zero in-degree fall back to Bernoulli(balance) postpaid draws.
inline std::vector<SubscriptionLabel> majority_infer(
    const std::vector<std::vector<uint32_t>>& in_neighbors,
    const std::vector<SubscriptionLabel>& source_labels, double balance,
    Rng& rng) {
  std::vector<SubscriptionLabel> out(in_neighbors.size());
  for (size_t v = 0; v < in_neighbors.size(); ++v) {
    int64_t vote = 0;
    for (uint32_t u : in_neighbors[v])
      vote += source_labels[u] == SubscriptionLabel::Postpaid ? 1 : -1;
    if (vote > 0) {
      out[v] = SubscriptionLabel::Postpaid;
    } else if (vote < 0) {
      out[v] = SubscriptionLabel::Prepaid;
    } else {
      out[v] = rng.bernoulli(balance) ? SubscriptionLabel::Postpaid
                                      : SubscriptionLabel::Prepaid;
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::vector<uint32_t>> in_adjacency(
    const std::vector<std::pair<uint32_t, uint32_t>>& edges, size_t n_to) {
  std::vector<std::vector<uint32_t>> in(n_to);
  for (auto [from, to] : edges) in[to].push_back(from);
  return in;
}

}  // namespace detail

// A -> B majority inference from true A labels, then B -> A with the same
// rule; recovered A labels are scored against the truth. Accuracy statistics
// are taken over A users with at least one incoming B tie, averaged over
// independent realizations (randomness only in tie/zero-degree fallbacks).
inline PropagationResult two_way_propagation(const BipartiteGraph& g,
                                             size_t realizations,
                                             uint64_t rng_seed) {
  if (g.ab_edges.empty() && g.ba_edges.empty())
    throw std::invalid_argument("bipartite graph has no edges");
  if (realizations == 0)
    throw std::invalid_argument("need at least one realization");
  auto b_in = detail::in_adjacency(g.ab_edges, g.b_ids.size());
  auto a_in = detail::in_adjacency(g.ba_edges, g.a_ids.size());
  double balance = g.postpaid_balance();

  PropagationResult res;
  res.realizations = realizations;
  for (size_t a = 0; a < g.a_ids.size(); ++a)
    if (!a_in[a].empty()) ++res.scored_a_users;
  if (res.scored_a_users == 0)
    throw std::invalid_argument("no A user has an incoming B tie");

  for (size_t r = 0; r < realizations; ++r) {
    Rng rng(derive_seed(rng_seed, r));
    auto b_labels = majority_infer(b_in, g.a_labels, balance, rng);
    auto a_rec = majority_infer(a_in, b_labels, balance, rng);
    size_t correct = 0;
    for (size_t a = 0; a < g.a_ids.size(); ++a)
      if (!a_in[a].empty() && a_rec[a] == g.a_labels[a]) ++correct;
    res.per_realization.push_back(static_cast<double>(correct) /
                                  res.scored_a_users);
    if (r == 0) {
      res.b_labels = std::move(b_labels);
      res.a_recovered = std::move(a_rec);
    }
  }
  double mean = 0.0;
  for (double a : res.per_realization) mean += a;
  mean /= realizations;
  double var = 0.0;
  for (double a : res.per_realization) var += (a - mean) * (a - mean);
  res.a_accuracy = mean;
  res.accuracy_std = std::sqrt(var / realizations);
  return res;
}

// Configuration-model null: double-edge swaps within each direction class.
// Performs n_swaps attempts; swaps creating duplicate edges or degenerate
// pairs are rejected. In/out degrees are preserved exactly.
inline BipartiteGraph degree_preserving_randomize(const BipartiteGraph& g,
                                                  size_t n_swaps,
                                                  uint64_t rng_seed,
                                                  size_t* accepted_out = nullptr) {
  BipartiteGraph out = g;
  Rng rng(derive_seed(rng_seed, 0xed6e));
  auto key = [](uint32_t u, uint32_t v) {
    return (static_cast<uint64_t>(u) << 32) | v;
  };
  std::unordered_set<uint64_t> present[2];
  std::vector<std::pair<uint32_t, uint32_t>>* lists[2] = {&out.ab_edges,
                                                          &out.ba_edges};
  for (int d = 0; d < 2; ++d)
    for (auto [u, v] : *lists[d]) present[d].insert(key(u, v));

  size_t total = out.ab_edges.size() + out.ba_edges.size();
  size_t accepted = 0;
  for (size_t step = 0; step < n_swaps; ++step) {
    // direction chosen proportionally to edge counts
    size_t pick = rng.next_below(total);
    int d = pick < out.ab_edges.size() ? 0 : 1;
    auto& edges = *lists[d];
    if (edges.size() < 2) continue;
    size_t i = rng.next_below(edges.size());
    size_t j = rng.next_below(edges.size());
    if (i == j) continue;
    auto [u1, v1] = edges[i];
    auto [u2, v2] = edges[j];
    if (u1 == u2 || v1 == v2) continue;
    uint64_t k1 = key(u1, v2), k2 = key(u2, v1);
    if (present[d].count(k1) || present[d].count(k2)) continue;
    present[d].erase(key(u1, v1));
    present[d].erase(key(u2, v2));
    present[d].insert(k1);
    present[d].insert(k2);
    edges[i] = {u1, v2};
    edges[j] = {u2, v1};
    ++accepted;
  }
  if (accepted_out) *accepted_out = accepted;
  return out;
}

// Per-A-user call statistics restricted to A -> B records. A users with no
// outgoing calls to B are excluded.
inline std::unordered_map<UserId, UserAttributes> inter_company_attributes(
    const std::vector<CdrRecord>& records,
    const std::unordered_set<UserId>& side_a,
    const std::unordered_set<UserId>& side_b) {
  for (UserId u : side_a)
    if (side_b.count(u))
      throw std::invalid_argument("sides A and B must be disjoint");
  std::vector<CdrRecord> ab;
  for (const auto& r : records)
    if (side_a.count(r.caller) && side_b.count(r.callee)) ab.push_back(r);
  std::unordered_set<UserId> endpoints;
  for (const auto& r : ab) {
    endpoints.insert(r.caller);
    endpoints.insert(r.callee);
  }
  CallGraph g = CallGraph::build(ab, endpoints);
  std::unordered_map<UserId, UserAttributes> out;
  for (uint32_t i = 0; i < g.node_count(); ++i) {
    UserId u = g.user_at(i);
    if (!side_a.count(u)) continue;
    bool has_call = false;
    for (const auto& e : g.out_edges(i))
      if (e.stats.call_count > 0) has_call = true;
    if (!has_call) continue;
    out[u] = extract_attributes(g, i);
  }
  return out;
}

struct CrossClassifyResult {
  ConfusionMatrix nb;
  ConfusionMatrix adaboost;
};

// The proxy protocol: train and test on A users' inter-company attributes.
inline CrossClassifyResult classify_cross(
    const std::unordered_map<UserId, std::vector<double>>& features,
    const std::unordered_map<UserId, SubscriptionLabel>& labels,
    const TrainTestSplit& split, size_t adaboost_rounds = 50) {
  std::vector<std::vector<double>> xtr;
  std::vector<SubscriptionLabel> ytr;
  for (UserId u : split.train) {
    xtr.push_back(features.at(u));
    ytr.push_back(labels.at(u));
  }
  GaussianNbModel nb = GaussianNbModel::train(xtr, ytr);
  StumpEnsemble ada = StumpEnsemble::train(xtr, ytr, adaboost_rounds);
  CrossClassifyResult res;
  for (UserId u : split.test) {
    const auto& x = features.at(u);
    SubscriptionLabel truth = labels.at(u);
    res.nb.add(truth, nb.predict(x));
    res.adaboost.add(truth, ada.predict(x));
  }
  return res;
}

}  // namespace subtype

#endif
