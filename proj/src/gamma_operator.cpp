#include "addwn/gamma_operator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "addwn/basis.hpp"
#include "addwn/linalg.hpp"
#include "addwn/quadrature.hpp"

namespace addwn {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// integral over [u,v] of q(t) * w(t) where w is constant on the uniform bins
// carrying `weights` and q has ascending polynomial coefficients `coef`
double weighted_poly_integral(const std::vector<double>& weights, const std::vector<double>& coef,
                              double u, double v) {
  const int m = static_cast<int>(weights.size());
  auto antiderivative = [&coef](double t) {
    double acc = 0.0, power = t;
    for (std::size_t k = 0; k < coef.size(); ++k) {
      acc += coef[k] * power / static_cast<double>(k + 1);
      power *= t;
    }
    return acc;
  };
  double total = 0.0;
  for (int b = 0; b < m; ++b) {
    const double lo = std::max(u, static_cast<double>(b) / m);
    const double hi = std::min(v, static_cast<double>(b + 1) / m);
    if (hi > lo) total += weights[static_cast<std::size_t>(b)] * (antiderivative(hi) - antiderivative(lo));
  }
  return total;
}

std::vector<double> poly_coef(const Poly& q) { return {q.c0, q.c1, q.c2}; }

std::vector<double> poly_square(const Poly& q) {
  const double c0 = q.c0, c1 = q.c1, c2 = q.c2;
  return {c0 * c0, 2 * c0 * c1, c1 * c1 + 2 * c0 * c2, 2 * c1 * c2, c2 * c2};
}

struct CellMasses {
  std::vector<Eigen::VectorXd> M;  // per coordinate: cell probabilities
  std::vector<Eigen::VectorXd> A;  // per coordinate: cell score masses
};

CellMasses compute_masses(const DesignModel& model, int G) {
  const int d = model.dimension();
  CellMasses cm;
  cm.M.resize(static_cast<std::size_t>(d));
  cm.A.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const PiecewiseDensity& p = model.marginal(j);
    const std::vector<double> coef = poly_coef(model.score(j));
    Eigen::VectorXd M(G), A(G);
    for (int a = 0; a < G; ++a) {
      const double lo = static_cast<double>(a) / G;
      const double hi = static_cast<double>(a + 1) / G;
      M(a) = p.cdf(hi) - p.cdf(lo);
      A(a) = weighted_poly_integral(p.values(), coef, lo, hi);
    }
    cm.M[static_cast<std::size_t>(j)] = std::move(M);
    cm.A[static_cast<std::size_t>(j)] = std::move(A);
  }
  return cm;
}

void check_model_and_grid(const DesignModel& model, int G) {
  if (G < 2) throw std::invalid_argument("gamma operator: grid size G must be at least 2");
  const DensityBounds b = model.validate_bounds();
  if (!b.ok) throw std::invalid_argument("gamma operator: design density violates its bounds");
}

Eigen::MatrixXd assemble_full(const DesignModel& model, int G, const CellMasses& cm,
                              bool diagonal_part, bool off_diagonal_part) {
  const int d = model.dimension();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(d * G, d * G);
  if (diagonal_part) {
    for (int j = 0; j < d; ++j) {
      full.block(j * G, j * G, G, G).diagonal() = G * cm.M[static_cast<std::size_t>(j)];
    }
  }
  if (off_diagonal_part) {
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        const Eigen::MatrixXd B =
            G * (cm.M[static_cast<std::size_t>(j)] * cm.M[static_cast<std::size_t>(k)].transpose() +
                 model.theta(j, k) * cm.A[static_cast<std::size_t>(j)] *
                     cm.A[static_cast<std::size_t>(k)].transpose());
        full.block(j * G, k * G, G, G) = B;
        full.block(k * G, j * G, G, G) = B.transpose();
      }
    }
  }
  return full;
}

struct FourierFactor {
  int u = 0;        // position within {1, cos m, sin m, ...}
  int freq = 0;     // m; 0 for the constant
  bool is_cos = false;
};

FourierFactor fourier_factor(int l, int d) {
  if (l < 1) throw std::invalid_argument("xi index must be >= 1");
  const int idx = l - 1;
  FourierFactor f;
  f.u = idx / d;
  f.freq = (f.u + 1) / 2;
  f.is_cos = (f.u % 2 == 1);
  return f;
}

double fourier_eval(const FourierFactor& f, double t) {
  if (f.u == 0) return 1.0;
  const double arg = kTwoPi * f.freq * t;
  return f.is_cos ? std::sqrt(2.0) * std::cos(arg) : std::sqrt(2.0) * std::sin(arg);
}

// composite Gauss-Legendre aligned with the density bins, refined to resolve
// the total trig frequency
double trig_density_integral(const PiecewiseDensity& p, int freq_sum,
                             const std::function<double(double)>& f) {
  const int bins = p.bins();
  const int needed = 2 * freq_sum + 2;
  const int mult = std::max(1, (needed + bins - 1) / bins);
  return quad::integrate01([&](double t) { return f(t) * p.value(t); }, bins * mult, 24);
}

Eigen::VectorXd stack_custom(const Eigen::MatrixXd& table, int d, int G) {
  Eigen::VectorXd v(d * G);
  for (int k = 0; k < d; ++k) v.segment(k * G, G) = table.row(k).transpose();
  return v;
}

void validate_custom(const XiBasis& basis, const std::vector<int>& L) {
  const int count = static_cast<int>(basis.functions.size());
  for (int l : L) {
    if (l < 1 || l > count) throw std::invalid_argument("xi index out of range for custom family");
  }
  for (std::size_t a = 0; a < L.size(); ++a) {
    const Eigen::VectorXd va =
        stack_custom(basis.functions[static_cast<std::size_t>(L[a] - 1)], basis.d, basis.G);
    for (std::size_t b = a; b < L.size(); ++b) {
      const Eigen::VectorXd vb =
          stack_custom(basis.functions[static_cast<std::size_t>(L[b] - 1)], basis.d, basis.G);
      const double ip = va.dot(vb) / basis.G;
      const double target = (a == b) ? 1.0 : 0.0;
      if (std::abs(ip - target) > 1e-8) {
        throw std::invalid_argument("custom xi family is not orthonormal in the grid geometry");
      }
    }
  }
}

}  // namespace

double AdditiveEvaluator::operator()(const double* x) const {
  double acc = 0.0;
  for (std::size_t l = 0; l < parts.size(); ++l) acc += parts[l](x[l]);
  return acc;
}

double AdditiveEvaluator::operator()(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dimension()) {
    throw std::invalid_argument("additive evaluator: dimension mismatch");
  }
  return (*this)(x.data());
}

AdditiveEvaluator apply_lambda_adjoint(std::vector<std::function<double(double)>> parts) {
  if (parts.empty()) throw std::invalid_argument("additive evaluator needs at least one part");
  return AdditiveEvaluator{std::move(parts)};
}

OperatorGrid assemble_gamma(const DesignModel& model, int G) {
  check_model_and_grid(model, G);
  const CellMasses cm = compute_masses(model, G);
  OperatorGrid op;
  op.d = model.dimension();
  op.G = G;
  op.kind = OperatorKind::gamma;
  op.full = assemble_full(model, G, cm, true, true);
  op.full = 0.5 * (op.full + op.full.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.full, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-10) throw std::runtime_error("gamma operator: discretization is not PSD");
  const double norm_cap = model.dimension() / model.rho();
  if (hi > norm_cap * (1.0 + 1e-9)) {
    throw std::runtime_error("gamma operator: operator norm exceeds d/rho");
  }
  return op;
}

OperatorGrid gamma_sqrt(const OperatorGrid& op, double tol) {
  if (op.kind != OperatorKind::gamma) {
    throw std::invalid_argument("gamma_sqrt expects an operator of kind gamma");
  }
  const SpectralDecomposition sd = spectral_decomposition_psd(op.full, tol);
  OperatorGrid out;
  out.d = op.d;
  out.G = op.G;
  out.kind = OperatorKind::gamma_sqrt;
  out.full = sd.vectors * sd.eigenvalues.cwiseSqrt().asDiagonal() * sd.vectors.transpose();
  return out;
}

GammaSplit split_gamma(const DesignModel& model, int G) {
  check_model_and_grid(model, G);
  const CellMasses cm = compute_masses(model, G);
  const int d = model.dimension();

  GammaSplit split;
  split.gamma_M.d = split.gamma_HS.d = d;
  split.gamma_M.G = split.gamma_HS.G = G;
  split.gamma_M.kind = OperatorKind::gamma_M;
  split.gamma_HS.kind = OperatorKind::gamma_HS;
  split.gamma_M.full = assemble_full(model, G, cm, true, false);
  split.gamma_HS.full = assemble_full(model, G, cm, false, true);

  const double rho = model.rho();
  if (split.gamma_M.full.diagonal().minCoeff() < rho * (1.0 - 1e-12)) {
    throw std::runtime_error("gamma operator: multiplication part violates ellipticity");
  }

  // per-coordinate moments of p^2 against {1, a, a^2}
  std::vector<double> P2(static_cast<std::size_t>(d)), PA(static_cast<std::size_t>(d)),
      PAA(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const PiecewiseDensity& p = model.marginal(j);
    std::vector<double> w2 = p.values();
    for (double& w : w2) w *= w;
    const Poly& a = model.score(j);
    P2[static_cast<std::size_t>(j)] = weighted_poly_integral(w2, {1.0}, 0.0, 1.0);
    PA[static_cast<std::size_t>(j)] = weighted_poly_integral(w2, poly_coef(a), 0.0, 1.0);
    PAA[static_cast<std::size_t>(j)] = weighted_poly_integral(w2, poly_square(a), 0.0, 1.0);
  }
  double hs = 0.0;
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      if (j == k) continue;
      const double th = model.theta(j, k);
      hs += P2[static_cast<std::size_t>(j)] * P2[static_cast<std::size_t>(k)] +
            2.0 * th * PA[static_cast<std::size_t>(j)] * PA[static_cast<std::size_t>(k)] +
            th * th * PAA[static_cast<std::size_t>(j)] * PAA[static_cast<std::size_t>(k)];
    }
  }
  split.hs_norm_sq = hs;
  const double cap = d * (d - 1) / (model.rho() * model.rho());
  if (hs > cap * (1.0 + 1e-12) + 1e-12) {
    throw std::runtime_error("gamma operator: Hilbert-Schmidt norm exceeds d(d-1)/rho^2");
  }
  return split;
}

Eigen::VectorXd grid_vector(int d, int G,
                            const std::vector<std::function<double(double)>>& parts) {
  if (static_cast<int>(parts.size()) != d) {
    throw std::invalid_argument("grid_vector: need one part per coordinate");
  }
  Eigen::VectorXd v(d * G);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < G; ++i) {
      v(k * G + i) = parts[static_cast<std::size_t>(k)]((i + 0.5) / G);
    }
  }
  return v;
}

double weighted_ip(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int G) {
  if (a.size() != b.size()) throw std::invalid_argument("weighted_ip: size mismatch");
  return a.dot(b) / G;
}

double h1_norm_sq(const OperatorGrid& sqrt_op) {
  if (sqrt_op.kind != OperatorKind::gamma_sqrt) {
    throw std::invalid_argument("h1_norm_sq expects a square-root operator");
  }
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(sqrt_op.size());
  e1.head(sqrt_op.G).setOnes();
  const Eigen::VectorXd h1 = sqrt_op.full * e1;
  return h1.squaredNorm() / sqrt_op.G;
}

XiBasis XiBasis::fourier(int d) {
  if (d < 1) throw std::invalid_argument("xi family needs dimension >= 1");
  XiBasis b;
  b.kind = Kind::fourier_per_component;
  b.d = d;
  return b;
}

XiBasis XiBasis::custom(int d, int G, std::vector<Eigen::MatrixXd> functions) {
  if (d < 1 || G < 1) throw std::invalid_argument("custom xi family: bad dimensions");
  if (functions.empty()) throw std::invalid_argument("custom xi family: no members");
  for (const Eigen::MatrixXd& t : functions) {
    if (t.rows() != d || t.cols() != G) {
      throw std::invalid_argument("custom xi family: member table has wrong shape");
    }
  }
  XiBasis b;
  b.kind = Kind::custom_grid;
  b.d = d;
  b.G = G;
  b.functions = std::move(functions);
  return b;
}

int xi_component(const XiBasis& basis, int l) {
  if (basis.kind != XiBasis::Kind::fourier_per_component) {
    throw std::invalid_argument("xi_component is defined for the built-in family only");
  }
  if (l < 1) throw std::invalid_argument("xi index must be >= 1");
  return (l - 1) % basis.d;
}

double xi_eval(const XiBasis& basis, int l, int k, double t) {
  if (k < 0 || k >= basis.d) throw std::invalid_argument("xi_eval: component out of range");
  if (basis.kind == XiBasis::Kind::fourier_per_component) {
    if (xi_component(basis, l) != k) return 0.0;
    return fourier_eval(fourier_factor(l, basis.d), t);
  }
  if (l < 1 || l > static_cast<int>(basis.functions.size())) {
    throw std::invalid_argument("xi index out of range for custom family");
  }
  return basis.functions[static_cast<std::size_t>(l - 1)](k, cell_index(t, basis.G));
}

double xi_sup_sq_sum(const XiBasis& basis, int l) {
  if (basis.kind == XiBasis::Kind::fourier_per_component) {
    return fourier_factor(l, basis.d).u == 0 ? 1.0 : 2.0;
  }
  if (l < 1 || l > static_cast<int>(basis.functions.size())) {
    throw std::invalid_argument("xi index out of range for custom family");
  }
  const Eigen::MatrixXd& t = basis.functions[static_cast<std::size_t>(l - 1)];
  double acc = 0.0;
  for (int k = 0; k < basis.d; ++k) {
    const double sup = t.row(k).cwiseAbs().maxCoeff();
    acc += sup * sup;
  }
  return acc;
}

GammaLReport gamma_L(const DesignModel& model, const XiBasis& basis, const std::vector<int>& L) {
  if (L.empty()) throw std::invalid_argument("gamma_L: empty index set");
  if (basis.d != model.dimension()) throw std::invalid_argument("gamma_L: dimension mismatch");
  const int m = static_cast<int>(L.size());
  Eigen::MatrixXd full_entries(m, m), mult_entries(m, m);

  if (basis.kind == XiBasis::Kind::fourier_per_component) {
    std::vector<int> comp(static_cast<std::size_t>(m));
    std::vector<FourierFactor> fac(static_cast<std::size_t>(m));
    std::vector<double> mu(static_cast<std::size_t>(m)), sc(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      comp[static_cast<std::size_t>(a)] = xi_component(basis, L[static_cast<std::size_t>(a)]);
      fac[static_cast<std::size_t>(a)] = fourier_factor(L[static_cast<std::size_t>(a)], basis.d);
      const int k = comp[static_cast<std::size_t>(a)];
      const FourierFactor& f = fac[static_cast<std::size_t>(a)];
      const PiecewiseDensity& p = model.marginal(k);
      const Poly& q = model.score(k);
      mu[static_cast<std::size_t>(a)] =
          trig_density_integral(p, f.freq, [&](double t) { return fourier_eval(f, t); });
      sc[static_cast<std::size_t>(a)] = trig_density_integral(
          p, f.freq, [&](double t) { return fourier_eval(f, t) * q.eval(t); });
    }
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        const int ka = comp[static_cast<std::size_t>(a)], kb = comp[static_cast<std::size_t>(b)];
        double gamma_entry, mult_entry;
        if (ka == kb) {
          const FourierFactor &fa = fac[static_cast<std::size_t>(a)],
                              &fb = fac[static_cast<std::size_t>(b)];
          gamma_entry = trig_density_integral(
              model.marginal(ka), fa.freq + fb.freq,
              [&](double t) { return fourier_eval(fa, t) * fourier_eval(fb, t); });
          mult_entry = gamma_entry;
        } else {
          gamma_entry = mu[static_cast<std::size_t>(a)] * mu[static_cast<std::size_t>(b)] +
                        model.theta(ka, kb) * sc[static_cast<std::size_t>(a)] *
                            sc[static_cast<std::size_t>(b)];
          mult_entry = 0.0;
        }
        full_entries(a, b) = full_entries(b, a) = gamma_entry;
        mult_entries(a, b) = mult_entries(b, a) = mult_entry;
      }
    }
  } else {
    validate_custom(basis, L);
    const OperatorGrid gamma_op = assemble_gamma(model, basis.G);
    const GammaSplit split = split_gamma(model, basis.G);
    std::vector<Eigen::VectorXd> vecs;
    vecs.reserve(L.size());
    for (int l : L) {
      vecs.push_back(stack_custom(basis.functions[static_cast<std::size_t>(l - 1)], basis.d, basis.G));
    }
    for (int a = 0; a < m; ++a) {
      const Eigen::VectorXd gva = gamma_op.full * vecs[static_cast<std::size_t>(a)];
      const Eigen::VectorXd mva = split.gamma_M.full * vecs[static_cast<std::size_t>(a)];
      for (int b = a; b < m; ++b) {
        full_entries(a, b) = full_entries(b, a) =
            vecs[static_cast<std::size_t>(b)].dot(gva) / basis.G;
        mult_entries(a, b) = mult_entries(b, a) =
            vecs[static_cast<std::size_t>(b)].dot(mva) / basis.G;
      }
    }
  }

  GammaLReport report;
  report.gamma = BasisMatrix{L, full_entries, basis.kind};
  report.gamma_M = BasisMatrix{L, mult_entries, basis.kind};
  report.frob_dist = (full_entries - mult_entries).norm();
  return report;
}

EmpiricalGammaL empirical_gamma_L(const Eigen::MatrixXd& X, const XiBasis& basis,
                                  const std::vector<int>& L, double rho) {
  if (L.empty()) throw std::invalid_argument("empirical_gamma_L: empty index set");
  if (X.rows() < 1) throw std::invalid_argument("empirical_gamma_L: empty covariate batch");
  if (X.cols() != basis.d) throw std::invalid_argument("empirical_gamma_L: dimension mismatch");
  if (!(rho > 0.0)) throw std::invalid_argument("empirical_gamma_L: rho must be positive");
  if (basis.kind == XiBasis::Kind::custom_grid) validate_custom(basis, L);

  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(L.size());
  Eigen::MatrixXd scores(n, m);
  for (int a = 0; a < m; ++a) {
    const int l = L[static_cast<std::size_t>(a)];
    if (basis.kind == XiBasis::Kind::fourier_per_component) {
      const int k = xi_component(basis, l);
      const FourierFactor f = fourier_factor(l, basis.d);
      for (int i = 0; i < n; ++i) scores(i, a) = fourier_eval(f, X(i, k));
    } else {
      const Eigen::MatrixXd& table = basis.functions[static_cast<std::size_t>(l - 1)];
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < basis.d; ++k) acc += table(k, cell_index(X(i, k), basis.G));
        scores(i, a) = acc;
      }
    }
  }

  EmpiricalGammaL out;
  out.gamma_hat = BasisMatrix{L, scores.transpose() * scores / n, basis.kind};
  double max_sup = 0.0;
  for (int l : L) max_sup = std::max(max_sup, xi_sup_sq_sum(basis, l));
  out.mse_bound =
      static_cast<double>(m) * m * basis.d * basis.d * max_sup / (rho * static_cast<double>(n));
  return out;
}

std::vector<int> contiguous_L(int first, int count) {
  if (first < 1 || count < 1) throw std::invalid_argument("contiguous_L: bad window");
  std::vector<int> L(static_cast<std::size_t>(count));
  std::iota(L.begin(), L.end(), first);
  return L;
}

}  // namespace addwn
