#ifndef SUBTYPE_NAIVE_BAYES_HPP
#define SUBTYPE_NAIVE_BAYES_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "subtype/cdr.hpp"

namespace subtype {

inline constexpr double kPosteriorClamp = 1e-10;
inline constexpr double kVarianceFloor = 1e-6;

struct Posterior {
  double p_prepaid;
  double p_postpaid;
};

// Two-class Gaussian Naive Bayes over real-valued feature vectors.
class GaussianNbModel {
 public:
  GaussianNbModel() = default;

  static GaussianNbModel train(const std::vector<std::vector<double>>& x,
                               const std::vector<SubscriptionLabel>& y) {
    if (x.size() != y.size() || x.empty())
      throw std::invalid_argument("features/labels size mismatch or empty");
    size_t dim = x[0].size();
    GaussianNbModel m;
    m.dim_ = dim;
    size_t counts[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
      m.mean_[c].assign(dim, 0.0);
      m.var_[c].assign(dim, 0.0);
    }
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != dim)
        throw std::invalid_argument("inconsistent feature dimensionality");
      int c = static_cast<int>(y[i]);
      ++counts[c];
      for (size_t j = 0; j < dim; ++j) m.mean_[c][j] += x[i][j];
    }
    if (counts[0] < 2 || counts[1] < 2)
      throw std::invalid_argument("need at least 2 examples per class");
    for (int c = 0; c < 2; ++c)
      for (size_t j = 0; j < dim; ++j) m.mean_[c][j] /= counts[c];
    for (size_t i = 0; i < x.size(); ++i) {
      int c = static_cast<int>(y[i]);
      for (size_t j = 0; j < dim; ++j) {
        double d = x[i][j] - m.mean_[c][j];
        m.var_[c][j] += d * d;
      }
    }
    for (int c = 0; c < 2; ++c) {
      for (size_t j = 0; j < dim; ++j) {
        m.var_[c][j] /= counts[c];
        if (m.var_[c][j] < kVarianceFloor) m.var_[c][j] = kVarianceFloor;
      }
      m.prior_[c] = static_cast<double>(counts[c]) / x.size();
    }
    return m;
  }

  size_t dim() const { return dim_; }
  double prior(int c) const { return prior_[c]; }
  double mean(int c, size_t j) const { return mean_[c][j]; }
  double variance(int c, size_t j) const { return var_[c][j]; }

  double log_joint(int c, const std::vector<double>& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("feature dimension mismatch");
    double ll = std::log(prior_[c]);
    for (size_t j = 0; j < dim_; ++j) {
      double d = x[j] - mean_[c][j];
      ll += -0.5 * (std::log(6.283185307179586 * var_[c][j]) +
                    d * d / var_[c][j]);
    }
    return ll;
  }

  // Normalized posterior, each component clamped to [1e-10, 1-1e-10].
  Posterior posterior(const std::vector<double>& x) const {
    double l0 = log_joint(0, x);
    double l1 = log_joint(1, x);
    double m = l0 > l1 ? l0 : l1;
    double e0 = std::exp(l0 - m);
    double e1 = std::exp(l1 - m);
    double p0 = e0 / (e0 + e1);
    double p1 = e1 / (e0 + e1);
    auto clamp = [](double p) {
      if (p < kPosteriorClamp) return kPosteriorClamp;
      if (p > 1.0 - kPosteriorClamp) return 1.0 - kPosteriorClamp;
      return p;
    };
    return {clamp(p0), clamp(p1)};
  }

  SubscriptionLabel predict(const std::vector<double>& x) const {
    Posterior p = posterior(x);
    return p.p_postpaid > p.p_prepaid ? SubscriptionLabel::Postpaid
                                      : SubscriptionLabel::Prepaid;
  }

  nlohmann::json to_json() const {
    return {{"schema_version", 1},
            {"model", "gaussian_nb"},
            {"priors", {prior_[0], prior_[1]}},
            {"means", {mean_[0], mean_[1]}},
            {"variances", {var_[0], var_[1]}}};
  }

  static GaussianNbModel from_json(const nlohmann::json& j) {
    GaussianNbModel m;
    m.prior_[0] = j.at("priors").at(0);
    m.prior_[1] = j.at("priors").at(1);
    m.mean_[0] = j.at("means").at(0).get<std::vector<double>>();
    m.mean_[1] = j.at("means").at(1).get<std::vector<double>>();
    m.var_[0] = j.at("variances").at(0).get<std::vector<double>>();
    m.var_[1] = j.at("variances").at(1).get<std::vector<double>>();
    m.dim_ = m.mean_[0].size();
    return m;
  }

 private:
  size_t dim_ = 0;
  double prior_[2] = {0.5, 0.5};
  std::vector<double> mean_[2];
  std::vector<double> var_[2];
};

}  // namespace subtype

#endif
