#ifndef SUBTYPE_METRICS_HPP
#define SUBTYPE_METRICS_HPP

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "subtype/cdr.hpp"
#include "subtype/rng.hpp"

namespace subtype {

// 2x2 confusion counts indexed (actual, predicted).
struct ConfusionMatrix {
  uint64_t counts[2][2] = {{0, 0}, {0, 0}};

  void add(SubscriptionLabel actual, SubscriptionLabel predicted) {
    counts[static_cast<int>(actual)][static_cast<int>(predicted)] += 1;
  }

  uint64_t total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  }

  double accuracy() const {
    uint64_t t = total();
    return t == 0 ? 0.0
                  : static_cast<double>(counts[0][0] + counts[1][1]) / t;
  }

  // row-normalized rate; 0 when the actual-class row is empty
  double rate(int actual, int predicted) const {
    uint64_t row = counts[actual][0] + counts[actual][1];
    return row == 0 ? 0.0
                    : static_cast<double>(counts[actual][predicted]) / row;
  }

  nlohmann::json to_json() const {
    return {{"counts",
             {{label_name(SubscriptionLabel::Prepaid),
               {{"prepaid", counts[0][0]}, {"postpaid", counts[0][1]}}},
              {label_name(SubscriptionLabel::Postpaid),
               {{"prepaid", counts[1][0]}, {"postpaid", counts[1][1]}}}}},
            {"accuracy", accuracy()}};
  }
};

inline ConfusionMatrix evaluate(
    const std::unordered_map<UserId, SubscriptionLabel>& predictions,
    const std::unordered_map<UserId, SubscriptionLabel>& truth) {
  ConfusionMatrix cm;
  for (const auto& [user, pred] : predictions) {
    auto it = truth.find(user);
    if (it == truth.end())
      throw std::invalid_argument("no truth label for user " +
                                  std::to_string(user));
    cm.add(it->second, pred);
  }
  return cm;
}

struct TrainTestSplit {
  std::vector<UserId> train;  // balanced across the two labels
  std::vector<UserId> test;
  uint64_t seed = 0;
};

// Uniform per-class sampling without replacement; remaining labeled users
// form the test set. Deterministic for a given seed.
inline TrainTestSplit sample_training_set(
    const std::unordered_map<UserId, SubscriptionLabel>& labels,
    size_t n_per_class, uint64_t seed) {
  std::vector<UserId> pool[2];
  for (const auto& [user, label] : labels)
    pool[static_cast<int>(label)].push_back(user);
  for (auto& p : pool) std::sort(p.begin(), p.end());
  for (int c = 0; c < 2; ++c) {
    if (pool[c].size() < n_per_class)
      throw std::invalid_argument(
          std::string("class ") +
          label_name(static_cast<SubscriptionLabel>(c)) + " has only " +
          std::to_string(pool[c].size()) + " users, need " +
          std::to_string(n_per_class));
  }
  TrainTestSplit split;
  split.seed = seed;
  Rng rng(derive_seed(seed, 0x5711u));
  for (int c = 0; c < 2; ++c) {
    auto& p = pool[c];
    // partial Fisher-Yates: the first n_per_class entries are the sample
    for (size_t i = 0; i < n_per_class; ++i) {
      size_t j = i + rng.next_below(p.size() - i);
      std::swap(p[i], p[j]);
    }
    split.train.insert(split.train.end(), p.begin(), p.begin() + n_per_class);
    split.test.insert(split.test.end(), p.begin() + n_per_class, p.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace subtype

#endif
