#ifndef SUBTYPE_PIPELINE_HPP
#define SUBTYPE_PIPELINE_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "subtype/adaboost.hpp"
#include "subtype/cdr.hpp"
#include "subtype/crossnet.hpp"
#include "subtype/features.hpp"
#include "subtype/io.hpp"
#include "subtype/labeling.hpp"
#include "subtype/metrics.hpp"
#include "subtype/naive_bayes.hpp"

namespace subtype {

enum class SmoothnessWeight { OutDegree, CallCount, CallDuration };

// Classified population: kept users that appear as graph nodes with at
// least one outgoing call.
struct ClassifiedData {
  CallGraph graph;
  std::vector<uint32_t> nodes;                    // classified node indices
  std::vector<std::vector<double>> features;      // row per classified node
  std::vector<SubscriptionLabel> labels;          // truth, row-parallel
  std::unordered_map<UserId, size_t> row_of;      // user -> row
  size_t feature_dim = 5;
};

inline ClassifiedData build_classified(
    const std::vector<CdrRecord>& records,
    const std::unordered_map<UserId, SubscriptionLabel>& truth,
    const FilterPolicy& policy = {}, bool with_portions = false) {
  auto kept_all = filter_users(records, policy);
  std::unordered_set<UserId> kept;
  for (UserId u : kept_all)
    if (truth.count(u)) kept.insert(u);

  ClassifiedData data;
  data.graph = CallGraph::build(records, kept);
  if (with_portions) data.feature_dim = 8;
  for (uint32_t i = 0; i < data.graph.node_count(); ++i) {
    uint64_t calls = 0;
    for (const auto& e : data.graph.out_edges(i)) calls += e.stats.call_count;
    if (calls == 0) continue;  // no usable outgoing statistics
    UserAttributes attrs = extract_attributes(data.graph, i);
    FeatureVector f = log_transform(attrs);
    std::vector<double> row(f.begin(), f.end());
    if (with_portions) {
      PortionAttributes p = extract_portion_attributes(data.graph, i, truth);
      row.push_back(p.f_n);
      row.push_back(p.f_c);
      row.push_back(p.f_d);
    }
    UserId u = data.graph.user_at(i);
    data.row_of[u] = data.nodes.size();
    data.nodes.push_back(i);
    data.features.push_back(std::move(row));
    data.labels.push_back(truth.at(u));
  }
  return data;
}

// effective per-class training size: the requested size, shrunk so that at
// most half of the smaller class is used for training
inline size_t scale_train_size(const ClassifiedData& data, size_t requested) {
  size_t count[2] = {0, 0};
  for (auto l : data.labels) count[static_cast<int>(l)]++;
  size_t cap = std::min(count[0], count[1]) / 2;
  return std::max<size_t>(1, std::min(requested, cap));
}

struct ClassifyOptions {
  FilterPolicy filter;
  size_t train_per_class = 10000;
  bool auto_scale_train = true;
  bool portion = false;
  size_t adaboost_rounds = 50;
  uint64_t seed = 1;
};

struct ClassifyOutcome {
  ConfusionMatrix nb;
  ConfusionMatrix adaboost;
  GaussianNbModel nb_model;
  StumpEnsemble ada_model;
  size_t n_classified = 0;
  size_t train_per_class = 0;
  size_t test_size = 0;
};

inline ClassifyOutcome run_classify(
    const std::vector<CdrRecord>& records,
    const std::unordered_map<UserId, SubscriptionLabel>& truth,
    const ClassifyOptions& opt) {
  ClassifiedData data =
      build_classified(records, truth, opt.filter, opt.portion);
  std::unordered_map<UserId, SubscriptionLabel> labels;
  for (const auto& [u, row] : data.row_of) labels[u] = data.labels[row];

  size_t n_train = opt.auto_scale_train
                       ? scale_train_size(data, opt.train_per_class)
                       : opt.train_per_class;
  TrainTestSplit split = sample_training_set(labels, n_train, opt.seed);

  std::vector<std::vector<double>> xtr;
  std::vector<SubscriptionLabel> ytr;
  for (UserId u : split.train) {
    size_t r = data.row_of.at(u);
    xtr.push_back(data.features[r]);
    ytr.push_back(data.labels[r]);
  }

  ClassifyOutcome out;
  out.n_classified = data.nodes.size();
  out.train_per_class = n_train;
  out.test_size = split.test.size();
  out.nb_model = GaussianNbModel::train(xtr, ytr);
  out.ada_model = StumpEnsemble::train(xtr, ytr, opt.adaboost_rounds);
  for (UserId u : split.test) {
    size_t r = data.row_of.at(u);
    out.nb.add(data.labels[r], out.nb_model.predict(data.features[r]));
    out.adaboost.add(data.labels[r], out.ada_model.predict(data.features[r]));
  }
  return out;
}

struct LabelOptions {
  FilterPolicy filter;
  size_t train_per_class = 10000;
  bool auto_scale_train = true;
  double lambda = 100.0;
  bool lambda_infinite = false;
  bool prune = false;
  double tau1 = 0.85;
  double tau2 = 0.65;
  SmoothnessWeight smoothness = SmoothnessWeight::OutDegree;
  uint64_t seed = 1;
};

struct LabelOutcome {
  ConfusionMatrix nb;        // NB argmax baseline on test users
  ConfusionMatrix labeling;  // min-cut labels on test users
  std::vector<io::LabeledUser> rows;  // all classified users
  std::unordered_map<UserId, SubscriptionLabel> predicted;
  size_t n_nodes = 0;
  size_t n_fixed = 0;
  double energy = 0.0;
  double flow_value = 0.0;
  size_t train_per_class = 0;
};

// Builds the energy model over the classified subgraph. Node order follows
// ClassifiedData rows; k_out comes from the call-graph out-degree.
inline LabelingProblem build_problem(const ClassifiedData& data,
                                     const std::vector<Posterior>& posteriors,
                                     const LabelOptions& opt) {
  LabelingProblem problem;
  size_t n = data.nodes.size();
  problem.users.resize(n);
  problem.data_cost.resize(n);
  problem.k_out.resize(n);
  problem.fixed.assign(n, std::nullopt);
  problem.lambda = opt.lambda;
  problem.lambda_infinite = opt.lambda_infinite;

  std::vector<int64_t> row_of_node(data.graph.node_count(), -1);
  for (size_t r = 0; r < n; ++r) row_of_node[data.nodes[r]] = r;
  for (size_t r = 0; r < n; ++r) {
    uint32_t node = data.nodes[r];
    problem.users[r] = data.graph.user_at(node);
    problem.data_cost[r] = data_cost(posteriors[r]);
    problem.k_out[r] = data.graph.out_degree(node);
    for (const auto& e : data.graph.out_edges(node)) {
      int64_t rv = row_of_node[e.to];
      if (rv < 0) continue;
      problem.social_edges.push_back(
          {static_cast<uint32_t>(r), static_cast<uint32_t>(rv)});
      if (opt.smoothness == SmoothnessWeight::CallCount) {
        problem.edge_weight_override.push_back(
            static_cast<double>(e.stats.call_count));
      } else if (opt.smoothness == SmoothnessWeight::CallDuration) {
        problem.edge_weight_override.push_back(
            static_cast<double>(e.stats.total_call_seconds));
      }
    }
  }
  return problem;
}

inline LabelOutcome run_label(
    const std::vector<CdrRecord>& records,
    const std::unordered_map<UserId, SubscriptionLabel>& truth,
    const LabelOptions& opt) {
  ClassifiedData data = build_classified(records, truth, opt.filter, false);
  std::unordered_map<UserId, SubscriptionLabel> labels;
  for (const auto& [u, row] : data.row_of) labels[u] = data.labels[row];

  size_t n_train = opt.auto_scale_train
                       ? scale_train_size(data, opt.train_per_class)
                       : opt.train_per_class;
  TrainTestSplit split = sample_training_set(labels, n_train, opt.seed);

  std::vector<std::vector<double>> xtr;
  std::vector<SubscriptionLabel> ytr;
  for (UserId u : split.train) {
    size_t r = data.row_of.at(u);
    xtr.push_back(data.features[r]);
    ytr.push_back(data.labels[r]);
  }
  GaussianNbModel nb = GaussianNbModel::train(xtr, ytr);

  size_t n = data.nodes.size();
  std::vector<Posterior> posteriors(n);
  for (size_t r = 0; r < n; ++r) posteriors[r] = nb.posterior(data.features[r]);

  LabelingProblem problem = build_problem(data, posteriors, opt);

  std::unordered_map<uint32_t, SubscriptionLabel> fixed;
  if (opt.prune) {
    // posteriors indexed by graph node for the pruning neighborhood scan
    std::vector<Posterior> by_node(data.graph.node_count(), {0.5, 0.5});
    for (size_t r = 0; r < n; ++r) by_node[data.nodes[r]] = posteriors[r];
    auto fixed_nodes =
        prune_fix_labels(by_node, data.graph, opt.tau1, opt.tau2);
    std::vector<int64_t> row_of_node(data.graph.node_count(), -1);
    for (size_t r = 0; r < n; ++r) row_of_node[data.nodes[r]] = r;
    for (const auto& [node, label] : fixed_nodes) {
      int64_t r = row_of_node[node];
      if (r < 0) continue;
      problem.fixed[r] = label;
      fixed[static_cast<uint32_t>(r)] = label;
    }
  }

  LabelingSolution sol = solve_labeling(problem);

  LabelOutcome out;
  out.n_nodes = n;
  out.n_fixed = fixed.size();
  out.energy = sol.energy;
  out.flow_value = sol.flow_value;
  out.train_per_class = n_train;
  out.rows.reserve(n);
  for (size_t r = 0; r < n; ++r) {
    out.predicted[problem.users[r]] = sol.label[r];
    out.rows.push_back({problem.users[r], sol.label[r],
                        posteriors[r].p_prepaid,
                        fixed.count(static_cast<uint32_t>(r)) > 0});
  }
  for (UserId u : split.test) {
    size_t r = data.row_of.at(u);
    out.nb.add(data.labels[r], nb.predict(data.features[r]));
    out.labeling.add(data.labels[r], sol.label[r]);
  }
  return out;
}

}  // namespace subtype

#endif
