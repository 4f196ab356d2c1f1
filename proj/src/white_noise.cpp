#include "addwn/white_noise.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace addwn {

namespace {

void check_path_params(long long n, double sigma, int T) {
  if (n < 1) throw std::invalid_argument("path simulation: sample size n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("path simulation: sigma must be positive");
  if (T < 8) throw std::invalid_argument("path simulation: time grid needs T >= 8 steps");
}

Eigen::VectorXd time_grid(int T) {
  Eigen::VectorXd times(T + 1);
  for (int i = 0; i <= T; ++i) times[i] = static_cast<double>(i) / T;
  return times;
}

// Left-endpoint Euler scheme: values(i+1) = values(i) + drift.row(i) dt
// + noise_scale sqrt(dt) Z_i with independent standard Gaussians.
ProcessPath euler_path(const Eigen::MatrixXd& drift, double noise_scale, std::string drift_spec,
                       RngStream& rng) {
  const int T = static_cast<int>(drift.rows());
  const int d = static_cast<int>(drift.cols());
  const double dt = 1.0 / T;
  const double root_dt = std::sqrt(dt);

  ProcessPath path;
  path.times = time_grid(T);
  path.values = Eigen::MatrixXd::Zero(T + 1, d);
  path.drift_spec = std::move(drift_spec);
  path.noise_scale = noise_scale;
  for (int i = 0; i < T; ++i) {
    for (int j = 0; j < d; ++j) {
      path.values(i + 1, j) =
          path.values(i, j) + drift(i, j) * dt + noise_scale * root_dt * rng.gaussian();
    }
  }
  return path;
}

// Univariate path with drift integrand p^{1/2} f evaluated at left endpoints.
ProcessPath weighted_component_path(const PiecewiseDensity& p, const ComponentFunction& f,
                                    double noise_scale, int T, std::string drift_spec,
                                    RngStream& rng) {
  Eigen::MatrixXd drift(T, 1);
  for (int i = 0; i < T; ++i) {
    const double t = static_cast<double>(i) / T;
    drift(i, 0) = std::sqrt(p.value(t)) * f.eval(t);
  }
  return euler_path(drift, noise_scale, std::move(drift_spec), rng);
}

}  // namespace

ProcessPath simulate_Rn(const OperatorGrid& gamma_sqrt_op,
                        const std::vector<ComponentFunction>& g_tilde, long long n, double sigma,
                        int T, RngStream& rng) {
  check_path_params(n, sigma, T);
  if (gamma_sqrt_op.kind != OperatorKind::gamma_sqrt) {
    throw std::invalid_argument("simulate_Rn: operator must be a square-root grid");
  }
  const int d = gamma_sqrt_op.d;
  const int G = gamma_sqrt_op.G;
  if (static_cast<int>(g_tilde.size()) != d) {
    throw std::invalid_argument("simulate_Rn: component count must match the operator dimension");
  }
  if (T % G != 0) {
    throw std::invalid_argument(
        "simulate_Rn: time grid does not align with the operator grid (T must be a multiple of "
        "the cell count)");
  }

  std::vector<std::function<double(double)>> parts;
  parts.reserve(g_tilde.size());
  for (const auto& f : g_tilde) parts.emplace_back([&f](double t) { return f.eval(t); });
  const Eigen::VectorXd h = gamma_sqrt_op.full * grid_vector(d, G, parts);

  // The drift is the step function with cell values h; a left endpoint i/T
  // lies in cell (i G)/T of the operator grid (exact integer division).
  Eigen::MatrixXd drift(T, d);
  for (int i = 0; i < T; ++i) {
    const int cell = static_cast<int>((static_cast<long long>(i) * G) / T);
    for (int j = 0; j < d; ++j) drift(i, j) = h[j * G + cell];
  }
  return euler_path(drift, sigma / std::sqrt(static_cast<double>(n)),
                    "square-root operator applied to the component samples", rng);
}

IndependentProcessExperiment simulate_Q(const CenteredDecomposition& decomp,
                                        const DesignModel& model, long long n, double sigma, int T,
                                        RngStream& rng) {
  check_path_params(n, sigma, T);
  if (!model.is_product()) {
    throw std::invalid_argument(
        "simulate_Q: the independent-components experiment requires a product design");
  }
  const int d = model.dimension();
  if (static_cast<int>(decomp.centered.size()) != d) {
    throw std::invalid_argument("simulate_Q: decomposition dimension must match the design");
  }
  for (int k = 0; k < d; ++k) {
    if (std::abs(model.mean(k, decomp.centered[k])) > 1e-8) {
      throw std::invalid_argument("simulate_Q: components must be centered against the marginals");
    }
  }

  const double noise_scale = sigma / std::sqrt(static_cast<double>(n));
  IndependentProcessExperiment out;
  RngStream shift_rng = rng.substream(0);
  out.shift_obs = decomp.g0 + noise_scale * shift_rng.gaussian();
  out.paths.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    RngStream path_rng = rng.substream(static_cast<std::uint64_t>(k) + 1);
    out.paths.push_back(weighted_component_path(
        model.marginal(k), decomp.centered[k], noise_scale, T,
        "root marginal density times centered component " + std::to_string(k), path_rng));
  }
  return out;
}

std::vector<ProcessPath> simulate_S(const std::vector<ComponentFunction>& g,
                                    const std::vector<PiecewiseDensity>& marginals, long long n,
                                    double sigma, int T, RngStream& rng) {
  check_path_params(n, sigma, T);
  if (g.size() != marginals.size() || g.empty()) {
    throw std::invalid_argument("simulate_S: need one component per marginal density");
  }
  const double noise_scale = sigma / std::sqrt(static_cast<double>(n));
  std::vector<ProcessPath> paths;
  paths.reserve(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    RngStream path_rng = rng.substream(static_cast<std::uint64_t>(j) + 1);
    paths.push_back(weighted_component_path(
        marginals[j], g[j], noise_scale, T,
        "root marginal density times component " + std::to_string(j), path_rng));
  }
  return paths;
}

ScoreObservation extract_scores(const ProcessPath& path,
                                const std::vector<GridTestFunction>& test_functions) {
  const int T = path.T();
  const int d = path.d();
  if (T < 1) throw std::invalid_argument("extract_scores: path has no increments");

  ScoreObservation obs;
  obs.values = Eigen::VectorXd::Zero(static_cast<int>(test_functions.size()));
  for (std::size_t m = 0; m < test_functions.size(); ++m) {
    double acc = 0.0;
    for (int i = 0; i < T; ++i) {
      const Eigen::VectorXd f = test_functions[m].eval(path.times[i]);
      if (f.size() != d) {
        throw std::invalid_argument("extract_scores: test function dimension must match the path");
      }
      acc += f.dot(path.values.row(i + 1) - path.values.row(i));
    }
    obs.values[static_cast<int>(m)] = acc;
    if (m > 0) obs.test_set += ",";
    obs.test_set += test_functions[m].name;
  }
  return obs;
}

ScoreObservation sheet_scores(const AdditiveFunction& g, const DesignModel& model,
                              const OrthonormalBasis& basis, long long n, double sigma,
                              SheetStage stage, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sheet_scores: sample size n must be >= 1");
  if (sigma < 0.0) throw std::invalid_argument("sheet_scores: sigma must be nonnegative");
  if (g.dimension() != model.dimension() || basis.dimension() != model.dimension()) {
    throw std::invalid_argument("sheet_scores: dimensions of g, design and basis must agree");
  }

  // The score functionals are the basis coefficients.  Because projecting the
  // drift onto the basis span leaves those coefficients unchanged, the full
  // and projected stages share the exact law N(coeffs, sigma^2 I / n).
  const Eigen::VectorXd coeffs = project(g, basis, model);
  const double noise_scale = sigma / std::sqrt(static_cast<double>(n));
  ScoreObservation obs;
  obs.values = coeffs;
  for (int j = 0; j < obs.values.size(); ++j) obs.values[j] += noise_scale * rng.gaussian();
  obs.test_set = stage == SheetStage::full_drift ? "sheet-scores(full drift)"
                                                 : "sheet-scores(projected drift)";
  return obs;
}

std::vector<Eigen::VectorXd> complete_h_basis(const OperatorGrid& gamma_sqrt_op, int count) {
  if (gamma_sqrt_op.kind != OperatorKind::gamma_sqrt) {
    throw std::invalid_argument("complete_h_basis: operator must be a square-root grid");
  }
  const int d = gamma_sqrt_op.d;
  const int G = gamma_sqrt_op.G;
  if (count < 1 || count > d * G) {
    throw std::invalid_argument("complete_h_basis: count must lie in [1, d*G]");
  }

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d * G);
  e1.head(G).setOnes();
  Eigen::VectorXd h1 = gamma_sqrt_op.full * e1;
  const double h1_norm = std::sqrt(weighted_ip(h1, h1, G));
  if (!(h1_norm > 1e-8)) {
    throw std::runtime_error("complete_h_basis: degenerate first direction");
  }
  h1 /= h1_norm;

  std::vector<Eigen::VectorXd> out;
  out.push_back(h1);

  // Extend by Gram-Schmidt over the per-component Fourier family sampled on
  // the operator grid (two orthogonalization sweeps for stability); members
  // already inside the current span are skipped.
  const XiBasis family = XiBasis::fourier(d);
  const int max_members = 4 * (count * d + 16);
  for (int l = 1; static_cast<int>(out.size()) < count; ++l) {
    if (l > max_members) {
      throw std::runtime_error("complete_h_basis: family exhausted before reaching count");
    }
    const int k = xi_component(family, l);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d * G);
    for (int a = 0; a < G; ++a) v[k * G + a] = xi_eval(family, l, k, gamma_sqrt_op.t(a));

    for (int sweep = 0; sweep < 2; ++sweep) {
      for (const auto& u : out) v -= weighted_ip(v, u, G) * u;
    }
    const double norm = std::sqrt(weighted_ip(v, v, G));
    if (norm > 1e-6) out.push_back(v / norm);
  }
  return out;
}

}  // namespace addwn
