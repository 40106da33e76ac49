#ifndef SUBTYPE_FEATURES_HPP
#define SUBTYPE_FEATURES_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "subtype/cdr.hpp"

namespace subtype {

struct UserAttributes {
  uint64_t n_calls_out = 0;
  uint64_t total_dur_out = 0;
  double mean_dur_out = 0.0;
  double std_dur_out = 0.0;  // population std of individual call durations
  uint32_t k_out = 0;        // distinct callees
};

// Postpaid portions of a user's callee set, outgoing calls and call seconds.
struct PortionAttributes {
  double f_n = 0.0;
  double f_c = 0.0;
  double f_d = 0.0;
};

using FeatureVector = std::array<double, 5>;

// Call statistics over the user's outgoing call edges. Requires at least one
// outgoing call (guaranteed by the duration filter for classified users).
inline UserAttributes extract_attributes(const CallGraph& graph,
                                         uint32_t node) {
  UserAttributes a;
  double sum_sq = 0.0;
  a.k_out = graph.out_degree(node);  // matches the call-graph out-degree
  for (const auto& e : graph.out_edges(node)) {
    a.n_calls_out += e.stats.call_count;
    a.total_dur_out += e.stats.total_call_seconds;
    sum_sq += e.stats.call_seconds_sq;
  }
  if (a.n_calls_out == 0)
    throw std::invalid_argument("user has no outgoing calls");
  double n = static_cast<double>(a.n_calls_out);
  a.mean_dur_out = static_cast<double>(a.total_dur_out) / n;
  double var = sum_sq / n - a.mean_dur_out * a.mean_dur_out;
  a.std_dur_out = var > 0.0 ? std::sqrt(var) : 0.0;
  return a;
}

// Oracle portion attributes: requires known labels for every callee.
inline PortionAttributes extract_portion_attributes(
    const CallGraph& graph, uint32_t node,
    const std::unordered_map<UserId, SubscriptionLabel>& labels) {
  uint64_t n_total = 0, n_post = 0;
  uint64_t c_total = 0, c_post = 0;
  uint64_t d_total = 0, d_post = 0;
  for (const auto& e : graph.out_edges(node)) {
    if (e.stats.call_count == 0) continue;
    auto it = labels.find(graph.user_at(e.to));
    if (it == labels.end())
      throw std::invalid_argument("callee has no known label");
    bool post = it->second == SubscriptionLabel::Postpaid;
    n_total += 1;
    c_total += e.stats.call_count;
    d_total += e.stats.total_call_seconds;
    if (post) {
      n_post += 1;
      c_post += e.stats.call_count;
      d_post += e.stats.total_call_seconds;
    }
  }
  PortionAttributes p;
  if (n_total > 0) p.f_n = static_cast<double>(n_post) / n_total;
  if (c_total > 0) p.f_c = static_cast<double>(c_post) / c_total;
  if (d_total > 0) p.f_d = static_cast<double>(d_post) / d_total;
  return p;
}

// log1p of every attribute; the raw statistics are heavy-tailed.
inline FeatureVector log_transform(const UserAttributes& a) {
  return {std::log1p(static_cast<double>(a.n_calls_out)),
          std::log1p(static_cast<double>(a.total_dur_out)),
          std::log1p(a.mean_dur_out), std::log1p(a.std_dur_out),
          std::log1p(static_cast<double>(a.k_out))};
}

}  // namespace subtype

#endif
