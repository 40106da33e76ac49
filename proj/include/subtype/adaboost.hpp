#ifndef SUBTYPE_ADABOOST_HPP
#define SUBTYPE_ADABOOST_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "subtype/cdr.hpp"

namespace subtype {

struct DecisionStump {
  size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;     // +1: predict postpaid when x > threshold
  double weight = 0.0;  // alpha

  int predict(const std::vector<double>& x) const {
    int raw = x[feature] > threshold ? 1 : -1;
    return polarity * raw;
  }
};

// Discrete AdaBoost over exhaustively searched decision stumps.
class StumpEnsemble {
 public:
  static StumpEnsemble train(const std::vector<std::vector<double>>& x,
                             const std::vector<SubscriptionLabel>& y,
                             size_t rounds) {
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (x.size() != y.size() || x.empty())
      throw std::invalid_argument("features/labels size mismatch or empty");
    size_t n = x.size();
    size_t dim = x[0].size();
    bool has[2] = {false, false};
    for (auto l : y) has[static_cast<int>(l)] = true;
    if (!has[0] || !has[1])
      throw std::invalid_argument("both classes must be present");

    std::vector<int> sign(n);
    for (size_t i = 0; i < n; ++i)
      sign[i] = y[i] == SubscriptionLabel::Postpaid ? 1 : -1;

    // per-feature sort orders, computed once
    std::vector<std::vector<uint32_t>> order(dim);
    for (size_t j = 0; j < dim; ++j) {
      order[j].resize(n);
      std::iota(order[j].begin(), order[j].end(), 0u);
      std::stable_sort(order[j].begin(), order[j].end(),
                       [&](uint32_t a, uint32_t b) { return x[a][j] < x[b][j]; });
    }

    std::vector<double> w(n, 1.0 / n);
    StumpEnsemble ens;
    for (size_t round = 0; round < rounds; ++round) {
      DecisionStump best;
      double best_err = 1.0;
      for (size_t j = 0; j < dim; ++j) {
        const auto& ord = order[j];
        // err(theta, polarity=+1) for theta below all points:
        // everything predicted postpaid -> misclassifies all prepaid
        double err_plus = 0.0;
        for (size_t i = 0; i < n; ++i)
          if (sign[i] < 0) err_plus += w[i];
        auto consider = [&](double theta, double err) {
          if (err < best_err) {
            best_err = err;
            best = {j, theta, 1, 0.0};
          }
          if (1.0 - err < best_err) {
            best_err = 1.0 - err;
            best = {j, theta, -1, 0.0};
          }
        };
        consider(x[ord[0]][j] - 1.0, err_plus);
        for (size_t k = 0; k < n; ++k) {
          uint32_t i = ord[k];
          // moving point i to the "<= theta" side (predicted prepaid)
          err_plus += sign[i] > 0 ? w[i] : -w[i];
          if (k + 1 < n && x[ord[k + 1]][j] == x[i][j]) continue;
          double theta = k + 1 < n
                             ? 0.5 * (x[i][j] + x[ord[k + 1]][j])
                             : x[i][j] + 1.0;
          consider(theta, err_plus);
        }
      }
      if (best_err >= 0.5) break;  // no stump beats chance, stop early
      double eps = std::clamp(best_err, 1e-12, 0.5 - 1e-12);
      best.weight = 0.5 * std::log((1.0 - eps) / eps);
      ens.stumps_.push_back(best);
      double norm = 0.0;
      for (size_t i = 0; i < n; ++i) {
        int h = best.predict(x[i]);
        w[i] *= std::exp(-best.weight * h * sign[i]);
        norm += w[i];
      }
      for (auto& wi : w) wi /= norm;
    }
    // may hold fewer rounds than requested (early stop)
    return ens;
  }

  double score(const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& st : stumps_) s += st.weight * st.predict(x);
    return s;
  }

  SubscriptionLabel predict(const std::vector<double>& x) const {
    return score(x) > 0.0 ? SubscriptionLabel::Postpaid
                          : SubscriptionLabel::Prepaid;
  }

  size_t rounds() const { return stumps_.size(); }
  const std::vector<DecisionStump>& stumps() const { return stumps_; }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : stumps_)
      arr.push_back({{"feature", s.feature},
                     {"threshold", s.threshold},
                     {"polarity", s.polarity},
                     {"weight", s.weight}});
    return {{"schema_version", 1}, {"model", "adaboost_stumps"}, {"stumps", arr}};
  }

  static StumpEnsemble from_json(const nlohmann::json& j) {
    StumpEnsemble e;
    for (const auto& s : j.at("stumps"))
      e.stumps_.push_back({s.at("feature"), s.at("threshold"), s.at("polarity"),
                           s.at("weight")});
    return e;
  }

 private:
  std::vector<DecisionStump> stumps_;
};

}  // namespace subtype

#endif
