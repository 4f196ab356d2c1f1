#include "addwn/design_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace addwn {

PiecewiseDensity PiecewiseDensity::uniform(int bins) {
  if (bins < 1) throw std::invalid_argument("PiecewiseDensity: bins must be >= 1");
  return PiecewiseDensity(std::vector<double>(static_cast<std::size_t>(bins), 1.0));
}

PiecewiseDensity PiecewiseDensity::from_weights(const std::vector<double>& weights) {
  if (weights.empty()) throw std::invalid_argument("PiecewiseDensity: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("PiecewiseDensity: weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("PiecewiseDensity: total weight must be > 0");
  std::vector<double> v(weights.size());
  const double m = static_cast<double>(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) v[i] = weights[i] * m / total;
  return PiecewiseDensity(std::move(v));
}

double PiecewiseDensity::value(double t) const {
  const int m = bins();
  int i = static_cast<int>(std::floor(t * m));
  i = std::clamp(i, 0, m - 1);
  return values_[static_cast<std::size_t>(i)];
}

double PiecewiseDensity::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double PiecewiseDensity::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double PiecewiseDensity::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const int m = bins();
  const int i = std::min(static_cast<int>(std::floor(t * m)), m - 1);
  double acc = 0.0;
  for (int j = 0; j < i; ++j) acc += values_[static_cast<std::size_t>(j)] / m;
  return acc + values_[static_cast<std::size_t>(i)] * (t - static_cast<double>(i) / m);
}

double PiecewiseDensity::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile: u must lie in [0,1]");
  const int m = bins();
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double mass = values_[static_cast<std::size_t>(i)] / m;
    if (acc + mass >= u && mass > 0.0) {
      return static_cast<double>(i) / m + (u - acc) / values_[static_cast<std::size_t>(i)];
    }
    acc += mass;
  }
  return 1.0;
}

double PiecewiseDensity::moment(int j) const {
  if (j < 0 || j > 2) throw std::invalid_argument("moment: order must be 0, 1 or 2");
  const int m = bins();
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double a = static_cast<double>(i) / m, b = static_cast<double>(i + 1) / m;
    double cell = 0.0;
    if (j == 0) cell = b - a;
    if (j == 1) cell = 0.5 * (b * b - a * a);
    if (j == 2) cell = (b * b * b - a * a * a) / 3.0;
    s += values_[static_cast<std::size_t>(i)] * cell;
  }
  return s;
}

double PiecewiseDensity::integral_against(const ComponentFunction& f) const {
  const int m = bins();
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    s += values_[static_cast<std::size_t>(i)] *
         f.integral(static_cast<double>(i) / m, static_cast<double>(i + 1) / m);
  }
  return s;
}

double Poly::sup_abs01() const {
  double m = std::max(std::abs(eval(0.0)), std::abs(eval(1.0)));
  if (c2 != 0.0) {
    const double v = -c1 / (2.0 * c2);
    if (v > 0.0 && v < 1.0) m = std::max(m, std::abs(eval(v)));
  }
  return m;
}

double poly_weighted_integral(const PiecewiseDensity& p, const Poly& q,
                              const ComponentFunction& f) {
  const int m = p.bins();
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double a = static_cast<double>(i) / m, b = static_cast<double>(i + 1) / m;
    const double cell = q.c0 * f.integral(a, b) + q.c1 * f.integral_t(a, b) +
                        q.c2 * f.integral_t2(a, b);
    s += p.values()[static_cast<std::size_t>(i)] * cell;
  }
  return s;
}

namespace {

Poly base_score(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::linear:
      return Poly{-1.0, 2.0, 0.0};  // 2t - 1
    case ScoreKind::quadratic:
      return Poly{1.0, -6.0, 6.0};  // shifted Legendre, degree 2
  }
  return Poly{};
}

// ∫ q p over [0,1] for polynomial q.
double poly_mean(const PiecewiseDensity& p, const Poly& q) {
  return q.c0 * p.moment(0) + q.c1 * p.moment(1) + q.c2 * p.moment(2);
}

}  // namespace

DesignModel::DesignModel(std::vector<PiecewiseDensity> marginals, std::vector<PairCoupling> pairs,
                         std::vector<ScoreKind> score_kinds, double rho)
    : marginals_(std::move(marginals)), pairs_(std::move(pairs)), rho_(rho) {
  const int d = dimension();
  if (d < 1) throw std::invalid_argument("DesignModel: dimension must be >= 1");
  if (!(rho_ > 0.0 && rho_ <= 1.0)) throw std::invalid_argument("DesignModel: rho must lie in (0,1]");
  if (score_kinds.empty()) score_kinds.assign(static_cast<std::size_t>(d), ScoreKind::linear);
  if (static_cast<int>(score_kinds.size()) != d)
    throw std::invalid_argument("DesignModel: one score kind per coordinate required");
  for (const PairCoupling& pc : pairs_) {
    if (!(pc.j >= 0 && pc.j < pc.k && pc.k < d))
      throw std::invalid_argument("DesignModel: pair indices must satisfy 0 <= j < k < d");
    if (!std::isfinite(pc.theta)) throw std::invalid_argument("DesignModel: theta must be finite");
    for (const PairCoupling& other : pairs_) {
      if (&other != &pc && other.j == pc.j && other.k == pc.k)
        throw std::invalid_argument("DesignModel: duplicate pair coupling");
    }
  }
  scores_.reserve(static_cast<std::size_t>(d));
  score_sup_.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    Poly q = base_score(score_kinds[static_cast<std::size_t>(k)]);
    q.c0 -= poly_mean(marginals_[static_cast<std::size_t>(k)], q);
    scores_.push_back(q);
    score_sup_.push_back(q.sup_abs01());
  }
}

DesignModel DesignModel::product(std::vector<PiecewiseDensity> marginals, double rho) {
  return DesignModel(std::move(marginals), {}, {}, rho);
}

DesignModel DesignModel::pairwise_perturbed(std::vector<PiecewiseDensity> marginals,
                                            std::vector<PairCoupling> pairs,
                                            std::vector<ScoreKind> score_kinds, double rho) {
  return DesignModel(std::move(marginals), std::move(pairs), std::move(score_kinds), rho);
}

const PiecewiseDensity& DesignModel::marginal(int k) const {
  if (k < 0 || k >= dimension())
    throw std::invalid_argument("DesignModel::marginal: coordinate out of range");
  return marginals_[static_cast<std::size_t>(k)];
}

double DesignModel::theta(int j, int k) const {
  if (j > k) std::swap(j, k);
  for (const PairCoupling& pc : pairs_) {
    if (pc.j == j && pc.k == k) return pc.theta;
  }
  return 0.0;
}

double DesignModel::density(const double* x, int d) const {
  if (d != dimension()) throw std::invalid_argument("DesignModel::density: dimension mismatch");
  double prod = 1.0;
  for (int k = 0; k < d; ++k) prod *= marginals_[static_cast<std::size_t>(k)].value(x[k]);
  double pert = 1.0;
  for (const PairCoupling& pc : pairs_) {
    pert += pc.theta * scores_[static_cast<std::size_t>(pc.j)].eval(x[pc.j]) *
            scores_[static_cast<std::size_t>(pc.k)].eval(x[pc.k]);
  }
  return prod * pert;
}

double DesignModel::density(const std::vector<double>& x) const {
  return density(x.data(), static_cast<int>(x.size()));
}

double DesignModel::bivariate(int j, int k, double s, double t) const {
  if (j == k) throw std::invalid_argument("bivariate: coordinates must differ");
  if (j < 0 || k < 0 || j >= dimension() || k >= dimension())
    throw std::invalid_argument("bivariate: coordinate out of range");
  const double base = marginals_[static_cast<std::size_t>(j)].value(s) *
                      marginals_[static_cast<std::size_t>(k)].value(t);
  const double th = theta(std::min(j, k), std::max(j, k));
  const double aj = scores_[static_cast<std::size_t>(j)].eval(s);
  const double ak = scores_[static_cast<std::size_t>(k)].eval(t);
  return base * (1.0 + th * aj * ak);
}

DensityBounds DesignModel::validate_bounds() const {
  double prod_min = 1.0, prod_max = 1.0;
  for (const PiecewiseDensity& p : marginals_) {
    prod_min *= p.min_value();
    prod_max *= p.max_value();
  }
  double spread = 0.0;
  for (const PairCoupling& pc : pairs_) {
    spread += std::abs(pc.theta) * score_sup_[static_cast<std::size_t>(pc.j)] *
              score_sup_[static_cast<std::size_t>(pc.k)];
  }
  DensityBounds out;
  const double lo_factor = 1.0 - spread;
  out.min_density = lo_factor >= 0.0 ? prod_min * lo_factor : prod_max * lo_factor;
  out.max_density = prod_max * (1.0 + spread);
  out.ok = out.min_density >= rho_ - 1e-12 && out.max_density <= 1.0 / rho_ + 1e-12;
  return out;
}

double DesignModel::envelope_acceptance() const {
  double spread = 0.0;
  for (const PairCoupling& pc : pairs_) {
    spread += std::abs(pc.theta) * score_sup_[static_cast<std::size_t>(pc.j)] *
              score_sup_[static_cast<std::size_t>(pc.k)];
  }
  return 1.0 / (1.0 + spread);
}

Eigen::MatrixXd DesignModel::sample(int n, RngStream& rng) const {
  if (n < 0) throw std::invalid_argument("sample: n must be >= 0");
  const int d = dimension();
  Eigen::MatrixXd x(n, d);
  if (is_product()) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k)
        x(i, k) = marginals_[static_cast<std::size_t>(k)].quantile(rng.uniform());
    }
    return x;
  }
  const DensityBounds b = validate_bounds();
  if (b.min_density < 0.0)
    throw std::runtime_error("sample: perturbed density is negative somewhere; model inadmissible");
  const double envelope = 1.0 / envelope_acceptance();
  std::vector<double> row(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    for (;;) {
      for (int k = 0; k < d; ++k)
        row[static_cast<std::size_t>(k)] = marginals_[static_cast<std::size_t>(k)].quantile(rng.uniform());
      double pert = 1.0;
      for (const PairCoupling& pc : pairs_) {
        pert += pc.theta * scores_[static_cast<std::size_t>(pc.j)].eval(row[static_cast<std::size_t>(pc.j)]) *
                scores_[static_cast<std::size_t>(pc.k)].eval(row[static_cast<std::size_t>(pc.k)]);
      }
      if (rng.uniform() * envelope <= pert) break;
    }
    for (int k = 0; k < d; ++k) x(i, k) = row[static_cast<std::size_t>(k)];
  }
  return x;
}

double DesignModel::mean(int k, const ComponentFunction& f) const {
  return marginal(k).integral_against(f);
}

double DesignModel::mean_sq(int k, const ComponentFunction& f) const {
  const PiecewiseDensity& p = marginal(k);
  const int m = p.bins();
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    s += p.values()[static_cast<std::size_t>(i)] *
         f.integral_sq(static_cast<double>(i) / m, static_cast<double>(i + 1) / m);
  }
  return s;
}

double DesignModel::mean_score(int k, const ComponentFunction& f) const {
  return poly_weighted_integral(marginal(k), scores_[static_cast<std::size_t>(k)], f);
}

double DesignModel::ip_same(int k, const ComponentFunction& f, const ComponentFunction& g) const {
  const ComponentFunction* pc = nullptr;
  const ComponentFunction* other = nullptr;
  if (f.kind() == ShapeKind::piecewise_constant || f.kind() == ShapeKind::constant) {
    pc = &f;
    other = &g;
  } else if (g.kind() == ShapeKind::piecewise_constant || g.kind() == ShapeKind::constant) {
    pc = &g;
    other = &f;
  } else {
    throw std::invalid_argument("ip_same: one factor must be piecewise-constant");
  }
  const PiecewiseDensity& p = marginal(k);
  const int pm = p.bins();
  const int fb = pc->kind() == ShapeKind::piecewise_constant
                     ? static_cast<int>(pc->levels().size())
                     : 1;
  const int cells = std::lcm(pm, fb);
  double s = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double a = static_cast<double>(i) / cells, b = static_cast<double>(i + 1) / cells;
    const double mid = 0.5 * (a + b);
    s += p.value(mid) * pc->eval(mid) * other->integral(a, b);
  }
  return s;
}

double DesignModel::ip_cross(int j, const ComponentFunction& f, int k,
                             const ComponentFunction& g) const {
  if (j == k) throw std::invalid_argument("ip_cross: coordinates must differ");
  double s = mean(j, f) * mean(k, g);
  const double th = theta(std::min(j, k), std::max(j, k));
  if (th != 0.0) s += th * mean_score(j, f) * mean_score(k, g);
  return s;
}

std::string DesignModel::describe() const {
  std::ostringstream os;
  os << (is_product() ? "product" : "pairwise_perturbed") << " d=" << dimension() << " bins=[";
  for (int k = 0; k < dimension(); ++k) os << (k ? "," : "") << marginal(k).bins();
  os << "] pairs=" << pairs_.size() << " rho=" << rho_;
  return os.str();
}

}  // namespace addwn
