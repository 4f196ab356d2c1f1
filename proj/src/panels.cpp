#include "addwn/panels.hpp"

#include <cmath>
#include <stdexcept>

#include "addwn/experiment_chain.hpp"

namespace addwn {

namespace {

void check_dimension(const std::string& id, int d, int minimum) {
  if (d < minimum) {
    throw std::invalid_argument("panel id '" + id + "' needs dimension >= " +
                                std::to_string(minimum));
  }
}

std::vector<PiecewiseDensity> uniform_marginals(int d) {
  return std::vector<PiecewiseDensity>(static_cast<std::size_t>(d), PiecewiseDensity::uniform(1));
}

}  // namespace

std::vector<std::string> function_panel_ids() {
  return {"linear-mix", "sine-smooth", "rough-bump", "mixed"};
}

AdditiveFunction panel_function(const std::string& id, int d) {
  if (d < 1) throw std::invalid_argument("panel_function: dimension must be >= 1");
  std::vector<ComponentFunction> parts;
  parts.reserve(static_cast<std::size_t>(d));
  if (id == "linear-mix") {
    // Slopes alternate in sign and taper with the coordinate; the class
    // constant is the largest |slope| (which also dominates the sup norm).
    for (int k = 0; k < d; ++k) {
      const double slope = (k % 2 == 0 ? 0.8 : -0.6) / (1.0 + 0.25 * k);
      parts.push_back(ComponentFunction::linear(-0.5 * slope, slope));
    }
    return AdditiveFunction(std::move(parts), 0.8, 1.0);
  }
  if (id == "sine-smooth") {
    // amplitude 0.5/(1+k), frequency alternating 1,2; Lipschitz constant of
    // component k is amplitude * 2 pi frequency <= pi.
    for (int k = 0; k < d; ++k) {
      parts.push_back(ComponentFunction::sine(0.5 / (1.0 + k), 1 + (k % 2)));
    }
    return AdditiveFunction(std::move(parts), 3.2, 1.0);
  }
  if (id == "rough-bump") {
    // Exactly 0.7-Hoelder bumps; constant and sup norm both equal the
    // amplitude, so C = 0.7 is honest.
    for (int k = 0; k < d; ++k) {
      const double center = 0.3 + 0.15 * (k % 4);
      parts.push_back(ComponentFunction::holder_bump(0.7 / (1.0 + k), 0.7, center));
    }
    return AdditiveFunction(std::move(parts), 0.7, 0.7);
  }
  if (id == "mixed") {
    // Cycle through the Lipschitz shape kinds; max Lipschitz constant is the
    // sine term 0.4 * 2 pi.
    for (int k = 0; k < d; ++k) {
      switch (k % 4) {
        case 0: parts.push_back(ComponentFunction::sine(0.4, 1)); break;
        case 1: parts.push_back(ComponentFunction::holder_bump(0.5, 1.0, 0.45)); break;
        case 2: parts.push_back(ComponentFunction::linear(0.15, -0.5)); break;
        default: parts.push_back(ComponentFunction::constant(0.2)); break;
      }
    }
    return AdditiveFunction(std::move(parts), 2.6, 1.0);
  }
  throw std::invalid_argument("unknown function panel id '" + id + "'");
}

std::vector<std::string> model_panel_ids(int d) {
  std::vector<std::string> ids{"uniform", "tilted"};
  if (d >= 2) {
    ids.push_back("fgm");
    ids.push_back("fgm-quadratic");
  }
  return ids;
}

DesignModel panel_model(const std::string& id, int d) {
  if (d < 1) throw std::invalid_argument("panel_model: dimension must be >= 1");
  if (id == "uniform") return DesignModel::product(uniform_marginals(d), 1.0);
  if (id == "tilted") {
    // Two-bin marginals alternating {0.9, 1.1} and {1.1, 0.9}; the exact
    // density floor is 0.9^d and the ceiling 1.1^d stays below 1/0.9^d.
    std::vector<PiecewiseDensity> marginals;
    double rho = 1.0;
    for (int k = 0; k < d; ++k) {
      marginals.push_back(k % 2 == 0 ? PiecewiseDensity::from_weights({0.9, 1.1})
                                     : PiecewiseDensity::from_weights({1.1, 0.9}));
      rho *= 0.9;
    }
    return DesignModel::product(std::move(marginals), rho);
  }
  if (id == "fgm") {
    check_dimension(id, d, 2);
    std::vector<ScoreKind> scores(static_cast<std::size_t>(d), ScoreKind::linear);
    return DesignModel::pairwise_perturbed(uniform_marginals(d), {{0, 1, 0.3}},
                                           std::move(scores), 0.7);
  }
  if (id == "fgm-quadratic") {
    check_dimension(id, d, 2);
    // Centered shifted-Legendre scores have sup 1 on uniform marginals, so
    // the density floor is 1 - theta.
    std::vector<ScoreKind> scores(static_cast<std::size_t>(d), ScoreKind::quadratic);
    return DesignModel::pairwise_perturbed(uniform_marginals(d), {{0, 1, 0.4}},
                                           std::move(scores), 0.6);
  }
  throw std::invalid_argument("unknown model panel id '" + id + "'");
}

std::vector<Scenario> standard_panel() {
  std::vector<Scenario> panel;
  panel.push_back({"uniform-sine", panel_model("uniform", 1), panel_function("sine-smooth", 1),
                   4096, 0.5, 64, 8});
  panel.push_back({"uniform-linear", panel_model("uniform", 1), panel_function("linear-mix", 1),
                   2048, 1.0, 32, 8});
  panel.push_back({"tilted-sine", panel_model("tilted", 2), panel_function("sine-smooth", 2),
                   4096, 0.5, 16, 4});
  panel.push_back({"fgm-mixed", panel_model("fgm", 2), panel_function("mixed", 2), 4096, 0.75,
                   16, 4});
  panel.push_back({"fgm-quadratic-bump", panel_model("fgm-quadratic", 2),
                   panel_function("rough-bump", 2), 2048, 0.5, 8, 4});
  panel.push_back({"tilted-4d", panel_model("tilted", 4), panel_function("mixed", 4), 4096, 0.5,
                   8, 2});
  return panel;
}

std::vector<Scenario> feasible_gamma_schedule(double gamma, const std::vector<int>& ns,
                                              double sigma) {
  const RegimeVerdict v = regime_check(1.0, 0.0);
  if (!(gamma > v.gamma_lo && gamma < v.gamma_hi)) {
    throw std::invalid_argument("feasible_gamma_schedule: gamma outside the feasible window");
  }
  const DesignModel model = panel_model("uniform", 1);
  const AdditiveFunction g = panel_function("sine-smooth", 1);
  std::vector<Scenario> schedule;
  for (int n : ns) {
    if (n < 16) throw std::invalid_argument("feasible_gamma_schedule: n too small");
    // K = J0 * round(n^gamma / J0) keeps K divisible by a near-optimal J.
    const int j0 = std::max(2, static_cast<int>(std::lround(std::cbrt(static_cast<double>(n)))));
    const double target = std::pow(static_cast<double>(n), gamma);
    const int K = j0 * std::max(1L, std::lround(target / j0));
    const int J = optimal_J(n, 1, 1.0, K);
    schedule.push_back({"gamma-" + std::to_string(n), model, g, n, sigma, K, J});
  }
  return schedule;
}

}  // namespace addwn
