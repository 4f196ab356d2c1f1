#pragma once

#include <Eigen/Core>
#include <vector>

#include "addwn/function_model.hpp"
#include "addwn/rng.hpp"

namespace addwn {

class RngStream;

// Density on [0,1], constant on `bins()` uniform bins, integrating to one.
class PiecewiseDensity {
 public:
  static PiecewiseDensity uniform(int bins);
  // Nonnegative weights, normalized so the density integrates to one.
  static PiecewiseDensity from_weights(const std::vector<double>& weights);

  int bins() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  double value(double t) const;
  double min_value() const;
  double max_value() const;

  double cdf(double t) const;
  double quantile(double u) const;

  // ∫ t^j p(t) dt, exact, j in {0,1,2}.
  double moment(int j) const;
  // ∫ f p, exact for every shape kind.
  double integral_against(const ComponentFunction& f) const;

 private:
  explicit PiecewiseDensity(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

// Quadratic polynomial c0 + c1 t + c2 t²; score functions live here so that
// every integral against the design stays closed-form.
struct Poly {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double eval(double t) const { return c0 + t * (c1 + t * c2); }
  // Exact sup of |q| over [0,1] (endpoints and interior vertex).
  double sup_abs01() const;
};

enum class ScoreKind { linear, quadratic };

struct PairCoupling {
  int j = 0, k = 0;   // j < k
  double theta = 0.0;
};

struct DensityBounds {
  double min_density = 0.0;
  double max_density = 0.0;
  bool ok = false;
};

// Product design with an optional pairwise perturbation:
//   p_X(x) = prod_k p_k(x_k) * (1 + sum_{j<k} theta_{jk} a_j(x_j) a_k(x_k)),
// where the scores a_j are centered against their marginals, so all 1-d
// marginals stay equal to p_k and the 2-d marginals pick up exactly their own
// pair term.
class DesignModel {
 public:
  static DesignModel product(std::vector<PiecewiseDensity> marginals, double rho);
  static DesignModel pairwise_perturbed(std::vector<PiecewiseDensity> marginals,
                                        std::vector<PairCoupling> pairs,
                                        std::vector<ScoreKind> score_kinds, double rho);

  int dimension() const { return static_cast<int>(marginals_.size()); }
  double rho() const { return rho_; }
  bool is_product() const { return pairs_.empty(); }
  const std::vector<PairCoupling>& pairs() const { return pairs_; }
  const PiecewiseDensity& marginal(int k) const;
  const Poly& score(int k) const { return scores_.at(static_cast<std::size_t>(k)); }
  double theta(int j, int k) const;  // 0 when the pair is uncoupled

  double density(const double* x, int d) const;
  double density(const std::vector<double>& x) const;
  // Exact 2-d marginal p_{jk}(s,t); j != k required.
  double bivariate(int j, int k, double s, double t) const;

  // Factored extremes: product part scanned per coordinate bin, pair part
  // bounded through sup|a_j|.  ok requires min >= rho and max <= 1/rho
  // (slack 1e-12).
  DensityBounds validate_bounds() const;

  // n i.i.d. rows; product family by inverse cdf, perturbed family by
  // rejection from the product envelope.
  Eigen::MatrixXd sample(int n, RngStream& rng) const;
  // Acceptance probability of the rejection envelope (1 for products).
  double envelope_acceptance() const;

  // Exact integral helpers (all closed-form):
  double mean(int k, const ComponentFunction& f) const;        // E f(X_k)
  double mean_sq(int k, const ComponentFunction& f) const;     // E f(X_k)^2
  double mean_score(int k, const ComponentFunction& f) const;  // E f(X_k) a_k(X_k)
  // E f(X_k) g(X_k); at least one of f,g must be piecewise-constant.
  double ip_same(int k, const ComponentFunction& f, const ComponentFunction& g) const;
  // E f(X_j) g(X_k) for j != k, via the factored pair term.
  double ip_cross(int j, const ComponentFunction& f, int k, const ComponentFunction& g) const;

  std::string describe() const;

 private:
  DesignModel(std::vector<PiecewiseDensity> marginals, std::vector<PairCoupling> pairs,
              std::vector<ScoreKind> score_kinds, double rho);

  std::vector<PiecewiseDensity> marginals_;
  std::vector<PairCoupling> pairs_;
  std::vector<Poly> scores_;       // centered against their marginals
  std::vector<double> score_sup_;  // sup|a_k|
  double rho_;
};

// ∫ q(t) f(t) p(t) dt, exact for polynomial q of degree <= 2.
double poly_weighted_integral(const PiecewiseDensity& p, const Poly& q, const ComponentFunction& f);

}  // namespace addwn
