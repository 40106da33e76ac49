#ifndef SUBTYPE_SYNTH_HPP
#define SUBTYPE_SYNTH_HPP

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "subtype/cdr.hpp"
#include "subtype/crossnet.hpp"
#include "subtype/rng.hpp"

namespace subtype {

struct BipartiteSynthConfig {
  size_t n_b_users = 0;
  double mean_b_in_degree = 2.593;
  double bidirectional_fraction = 0.89;
  double mean_calls_per_tie = 4.0;  // for the prepaid caller class
};

struct SynthConfig {
  size_t n_users = 10000;
  double postpaid_fraction = 0.5;
  // row-stochastic call-destination mix by (caller label, callee label)
  double homophily[2][2] = {{0.791, 0.209}, {0.173, 0.827}};
  double call_rate_ratio = 2.9;  // postpaid mean calls / prepaid mean calls
  double degree_ratio = 2.5;     // postpaid mean callees / prepaid
  double prepaid_mean_calls = 20.0;
  double prepaid_mean_degree = 6.0;
  double duration_mu[2] = {3.3, 3.7};  // lognormal per label
  double duration_sigma[2] = {1.0, 1.0};
  double sms_rate = 0.2;  // expected SMS events per call
  int64_t window_seconds = 2592000;  // 30 days
  uint64_t seed = 1;
  bool has_bipartite = false;
  BipartiteSynthConfig bipartite;

  void validate() const {
    if (n_users < 4) throw std::invalid_argument("n_users too small");
    if (!(postpaid_fraction > 0.0 && postpaid_fraction <= 1.0))
      throw std::invalid_argument("postpaid_fraction must be in (0,1]");
    for (int r = 0; r < 2; ++r) {
      double s = homophily[r][0] + homophily[r][1];
      if (std::abs(s - 1.0) > 1e-9)
        throw std::invalid_argument("homophily rows must sum to 1");
      if (homophily[r][0] < 0 || homophily[r][1] < 0)
        throw std::invalid_argument("homophily entries must be >= 0");
    }
    if (prepaid_mean_calls <= 0 || prepaid_mean_degree <= 0 ||
        call_rate_ratio <= 0 || degree_ratio <= 0)
      throw std::invalid_argument("means and ratios must be positive");
    double max_deg = prepaid_mean_degree * std::max(1.0, degree_ratio);
    double major_class =
        n_users * std::max(postpaid_fraction, 1.0 - postpaid_fraction);
    if (max_deg * 4.0 >= major_class)
      throw std::invalid_argument(
          "mean degree too large for the class populations");
    if (has_bipartite) {
      if (bipartite.n_b_users < 4)
        throw std::invalid_argument("bipartite n_b_users too small");
      if (bipartite.mean_b_in_degree <= 0)
        throw std::invalid_argument("mean_b_in_degree must be positive");
      if (bipartite.bidirectional_fraction < 0 ||
          bipartite.bidirectional_fraction > 1)
        throw std::invalid_argument("bidirectional_fraction must be in [0,1]");
    }
  }

  static SynthConfig from_json(const nlohmann::json& j) {
    SynthConfig c;
    if (j.contains("n_users")) c.n_users = j.at("n_users");
    if (j.contains("postpaid_fraction"))
      c.postpaid_fraction = j.at("postpaid_fraction");
    if (j.contains("homophily")) {
      const auto& h = j.at("homophily");
      for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 2; ++k) c.homophily[r][k] = h.at(r).at(k);
    }
    if (j.contains("call_rate_ratio"))
      c.call_rate_ratio = j.at("call_rate_ratio");
    if (j.contains("degree_ratio")) c.degree_ratio = j.at("degree_ratio");
    if (j.contains("prepaid_mean_calls"))
      c.prepaid_mean_calls = j.at("prepaid_mean_calls");
    if (j.contains("prepaid_mean_degree"))
      c.prepaid_mean_degree = j.at("prepaid_mean_degree");
    if (j.contains("duration_mu")) {
      c.duration_mu[0] = j.at("duration_mu").at(0);
      c.duration_mu[1] = j.at("duration_mu").at(1);
    }
    if (j.contains("duration_sigma")) {
      c.duration_sigma[0] = j.at("duration_sigma").at(0);
      c.duration_sigma[1] = j.at("duration_sigma").at(1);
    }
    if (j.contains("sms_rate")) c.sms_rate = j.at("sms_rate");
    if (j.contains("seed")) c.seed = j.at("seed");
    if (j.contains("bipartite")) {
      c.has_bipartite = true;
      const auto& b = j.at("bipartite");
      if (b.contains("n_b_users")) c.bipartite.n_b_users = b.at("n_b_users");
      if (b.contains("mean_b_in_degree"))
        c.bipartite.mean_b_in_degree = b.at("mean_b_in_degree");
      if (b.contains("bidirectional_fraction"))
        c.bipartite.bidirectional_fraction = b.at("bidirectional_fraction");
      if (b.contains("mean_calls_per_tie"))
        c.bipartite.mean_calls_per_tie = b.at("mean_calls_per_tie");
    }
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {
        {"n_users", n_users},
        {"postpaid_fraction", postpaid_fraction},
        {"homophily",
         {{homophily[0][0], homophily[0][1]},
          {homophily[1][0], homophily[1][1]}}},
        {"call_rate_ratio", call_rate_ratio},
        {"degree_ratio", degree_ratio},
        {"prepaid_mean_calls", prepaid_mean_calls},
        {"prepaid_mean_degree", prepaid_mean_degree},
        {"duration_mu", {duration_mu[0], duration_mu[1]}},
        {"duration_sigma", {duration_sigma[0], duration_sigma[1]}},
        {"sms_rate", sms_rate},
        {"seed", seed}};
    if (has_bipartite) {
      j["bipartite"] = {
          {"n_b_users", bipartite.n_b_users},
          {"mean_b_in_degree", bipartite.mean_b_in_degree},
          {"bidirectional_fraction", bipartite.bidirectional_fraction},
          {"mean_calls_per_tie", bipartite.mean_calls_per_tie}};
    }
    return j;
  }
};

struct SynthCorpus {
  std::vector<CdrRecord> records;
  std::unordered_map<UserId, SubscriptionLabel> truth;  // company users
  bool has_bipartite = false;
  BipartiteGraph bipartite;
  // test-only oracle; never an input to any inference path
  std::vector<SubscriptionLabel> hidden_b_labels;
};

namespace detail {

// seed streams, offset by purpose so user streams never collide
inline constexpr uint64_t kLabelStream = 1;
inline constexpr uint64_t kUserStreamBase = 1ULL << 20;
inline constexpr uint64_t kBipartiteStreamBase = 1ULL << 40;

inline uint32_t draw_duration(Rng& rng, const SynthConfig& cfg, int label) {
  double d = rng.lognormal(cfg.duration_mu[label], cfg.duration_sigma[label]);
  if (d < 1.0) d = 1.0;
  if (d > 86400.0) d = 86400.0;
  return static_cast<uint32_t>(d);
}

inline int64_t draw_timestamp(Rng& rng, const SynthConfig& cfg) {
  return static_cast<int64_t>(
      rng.next_below(static_cast<uint64_t>(cfg.window_seconds)));
}

// A <-> B ties honoring caller-row homophily against hidden B labels, with
// configurable mean B in-degree and bidirectional fraction. Also emits the
// inter-company call records. B-side ids start at n_users + 1.
inline void generate_bipartite_into(
    const SynthConfig& cfg, const std::vector<SubscriptionLabel>& a_labels,
    SynthCorpus& corpus) {
  const size_t n_a = a_labels.size();
  const size_t n_b = cfg.bipartite.n_b_users;
  BipartiteGraph& g = corpus.bipartite;
  g.a_ids.resize(n_a);
  g.a_labels = a_labels;
  for (size_t i = 0; i < n_a; ++i) g.a_ids[i] = static_cast<UserId>(i + 1);
  g.b_ids.resize(n_b);
  for (size_t i = 0; i < n_b; ++i)
    g.b_ids[i] = static_cast<UserId>(n_a + i + 1);

  Rng rng(derive_seed(cfg.seed, kBipartiteStreamBase));
  corpus.hidden_b_labels.resize(n_b);
  std::vector<std::vector<uint32_t>> b_members(2);
  for (size_t i = 0; i < n_b; ++i) {
    corpus.hidden_b_labels[i] = rng.bernoulli(cfg.postpaid_fraction)
                                    ? SubscriptionLabel::Postpaid
                                    : SubscriptionLabel::Prepaid;
    b_members[static_cast<int>(corpus.hidden_b_labels[i])].push_back(
        static_cast<uint32_t>(i));
  }

  // per-A-user tie means keep the configured B in-degree on average while
  // preserving the degree ratio between the caller classes
  size_t n_post = 0;
  for (auto l : a_labels)
    if (l == SubscriptionLabel::Postpaid) ++n_post;
  double total_target = cfg.bipartite.mean_b_in_degree * n_b;
  double denom = (n_a - n_post) + cfg.degree_ratio * n_post;
  double t_pre = total_target / denom;

  std::unordered_set<uint64_t> tie_seen;
  for (size_t a = 0; a < n_a; ++a) {
    Rng arng(derive_seed(cfg.seed, kBipartiteStreamBase + 1 + a));
    int lab = static_cast<int>(a_labels[a]);
    double mean = t_pre * (lab == 1 ? cfg.degree_ratio : 1.0);
    size_t n_ties = arng.geometric(mean);
    for (size_t d = 0; d < n_ties; ++d) {
      int target = arng.bernoulli(cfg.homophily[lab][1]) ? 1 : 0;
      if (b_members[target].empty()) target = 1 - target;
      const auto& pool = b_members[target];
      uint32_t b = 0;
      bool found = false;
      for (int attempt = 0; attempt < 20; ++attempt) {
        b = pool[arng.next_below(pool.size())];
        uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
        if (tie_seen.count(key)) continue;
        tie_seen.insert(key);
        found = true;
        break;
      }
      if (!found) continue;
      g.ab_edges.push_back({static_cast<uint32_t>(a), b});
      bool bidir = arng.bernoulli(cfg.bipartite.bidirectional_fraction);
      if (bidir) g.ba_edges.push_back({b, static_cast<uint32_t>(a)});

      // inter-company call records for this tie
      double call_mean = cfg.bipartite.mean_calls_per_tie *
                         (lab == 1 ? cfg.call_rate_ratio : 1.0);
      size_t n_calls = 1 + arng.geometric(call_mean - 1.0);
      for (size_t c = 0; c < n_calls; ++c) {
        CdrRecord rec;
        rec.timestamp = draw_timestamp(arng, cfg);
        rec.event_type = EventType::Call;
        rec.duration = draw_duration(arng, cfg, lab);
        rec.caller = g.a_ids[a];
        rec.callee = g.b_ids[b];
        corpus.records.push_back(rec);
      }
      if (bidir) {
        int blab = static_cast<int>(corpus.hidden_b_labels[b]);
        double bmean = cfg.bipartite.mean_calls_per_tie *
                       (blab == 1 ? cfg.call_rate_ratio : 1.0);
        size_t nb_calls = 1 + arng.geometric(bmean - 1.0);
        for (size_t c = 0; c < nb_calls; ++c) {
          CdrRecord rec;
          rec.timestamp = draw_timestamp(arng, cfg);
          rec.event_type = EventType::Call;
          rec.duration = draw_duration(arng, cfg, blab);
          rec.caller = g.b_ids[b];
          rec.callee = g.a_ids[a];
          corpus.records.push_back(rec);
        }
      }
    }
  }
  corpus.has_bipartite = true;
}

}  // namespace detail

// Deterministic synthetic CDR corpus with label homophily and
// label-dependent activity. Company ids are 1..n_users; B-side ids follow.
inline SynthCorpus generate_cdrs(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus corpus;
  const size_t n = cfg.n_users;

  std::vector<SubscriptionLabel> labels(n);
  std::vector<std::vector<uint32_t>> members(2);
  {
    Rng rng(derive_seed(cfg.seed, detail::kLabelStream));
    for (size_t i = 0; i < n; ++i) {
      labels[i] = rng.bernoulli(cfg.postpaid_fraction)
                      ? SubscriptionLabel::Postpaid
                      : SubscriptionLabel::Prepaid;
      members[static_cast<int>(labels[i])].push_back(
          static_cast<uint32_t>(i));
      corpus.truth[static_cast<UserId>(i + 1)] = labels[i];
    }
  }

  for (size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(cfg.seed, detail::kUserStreamBase + i));
    int lab = static_cast<int>(labels[i]);
    double deg_mean =
        cfg.prepaid_mean_degree * (lab == 1 ? cfg.degree_ratio : 1.0);
    size_t degree = 1 + rng.geometric(deg_mean - 1.0);

    std::vector<uint32_t> callees;
    std::unordered_set<uint32_t> seen;
    for (size_t d = 0; d < degree; ++d) {
      int target = rng.bernoulli(cfg.homophily[lab][1]) ? 1 : 0;
      if (members[target].empty()) target = 1 - target;
      const auto& pool = members[target];
      for (int attempt = 0; attempt < 20; ++attempt) {
        uint32_t v = pool[rng.next_below(pool.size())];
        if (v == i || seen.count(v)) continue;
        seen.insert(v);
        callees.push_back(v);
        break;
      }
    }
    if (callees.empty()) continue;

    double call_mean =
        cfg.prepaid_mean_calls * (lab == 1 ? cfg.call_rate_ratio : 1.0);
    double extra_mean = call_mean - static_cast<double>(callees.size());
    size_t n_calls =
        callees.size() + (extra_mean > 0 ? rng.geometric(extra_mean) : 0);

    for (size_t c = 0; c < n_calls; ++c) {
      // one guaranteed call per callee, the rest spread uniformly
      uint32_t v = c < callees.size()
                       ? callees[c]
                       : callees[rng.next_below(callees.size())];
      CdrRecord rec;
      rec.timestamp = detail::draw_timestamp(rng, cfg);
      rec.event_type = EventType::Call;
      rec.duration = detail::draw_duration(rng, cfg, lab);
      rec.caller = static_cast<UserId>(i + 1);
      rec.callee = static_cast<UserId>(v + 1);
      corpus.records.push_back(rec);
      if (rng.bernoulli(cfg.sms_rate)) {
        CdrRecord sms = rec;
        sms.timestamp = detail::draw_timestamp(rng, cfg);
        sms.event_type = EventType::Sms;
        sms.duration = 0;
        corpus.records.push_back(sms);
      }
    }
  }

  if (cfg.has_bipartite) detail::generate_bipartite_into(cfg, labels, corpus);
  return corpus;
}

// Standalone bipartite generation against an existing A-side truth map.
inline SynthCorpus generate_bipartite(
    const SynthConfig& cfg,
    const std::unordered_map<UserId, SubscriptionLabel>& truth_a) {
  if (!cfg.has_bipartite)
    throw std::invalid_argument("bipartite sub-config missing");
  cfg.validate();
  if (truth_a.size() != cfg.n_users)
    throw std::invalid_argument("truth_a must cover ids 1..n_users");
  std::vector<SubscriptionLabel> labels(cfg.n_users);
  for (size_t i = 0; i < cfg.n_users; ++i) {
    auto it = truth_a.find(static_cast<UserId>(i + 1));
    if (it == truth_a.end())
      throw std::invalid_argument("truth_a must cover ids 1..n_users");
    labels[i] = it->second;
  }
  SynthCorpus corpus;
  corpus.truth = truth_a;
  detail::generate_bipartite_into(cfg, labels, corpus);
  return corpus;
}

}  // namespace subtype

#endif
