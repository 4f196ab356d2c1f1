#include "addwn/basis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace addwn {

namespace {

// Unscaled contrast levels of breakpoint k over the K cells: K/k below the
// breakpoint, -K on the breakpoint cell, zero above.
std::vector<double> contrast_levels(int K, int k, double scale) {
  std::vector<double> lv(static_cast<std::size_t>(K), 0.0);
  for (int i = 0; i < k; ++i) lv[static_cast<std::size_t>(i)] = scale * static_cast<double>(K) / k;
  lv[static_cast<std::size_t>(k)] = -scale * static_cast<double>(K);
  return lv;
}

// Profiles shared by every coordinate: index k-1 holds breakpoint k.
std::vector<ComponentFunction> contrast_profiles(const RawBasisSpec& raw) {
  std::vector<ComponentFunction> out;
  out.reserve(static_cast<std::size_t>(raw.K - 1));
  for (int k = 1; k < raw.K; ++k) {
    const double s = std::pow(static_cast<double>(raw.K), -0.5) * std::pow(1.0 + 1.0 / k, -0.5);
    out.push_back(ComponentFunction::piecewise(contrast_levels(raw.K, k, s)));
  }
  return out;
}

void check_grid_alignment(const RawBasisSpec& raw, const DesignModel& model) {
  if (model.dimension() != raw.d)
    throw std::invalid_argument("basis/model dimension mismatch");
  for (int c = 0; c < raw.d; ++c) {
    const int bins = model.marginal(c).bins();
    if (bins % raw.K != 0 && raw.K % bins != 0)
      throw std::invalid_argument(
          "basis grid misaligned with marginal grid: bins and K must nest "
          "(bins % K == 0 or K % bins == 0)");
  }
}

}  // namespace

double RawBasisSpec::cell_value(int j, int cell) const {
  const RawBasisEntry& e = entries.at(static_cast<std::size_t>(j));
  if (e.coordinate < 0) return 1.0;
  if (cell < e.breakpoint) return e.level_left;
  if (cell == e.breakpoint) return e.level_right;
  return 0.0;
}

double RawBasisSpec::eval(int j, const double* x) const {
  const RawBasisEntry& e = entries.at(static_cast<std::size_t>(j));
  if (e.coordinate < 0) return 1.0;
  return cell_value(j, cell_index(x[e.coordinate], K));
}

ComponentFunction RawBasisSpec::component(int j) const {
  const RawBasisEntry& e = entries.at(static_cast<std::size_t>(j));
  if (e.coordinate < 0) return ComponentFunction::constant(1.0);
  return ComponentFunction::piecewise(contrast_levels(K, e.breakpoint, e.scale));
}

RawBasisSpec build_raw_basis(int K, int d) {
  if (K < 2) throw std::invalid_argument("build_raw_basis: K must be >= 2");
  if (d < 1) throw std::invalid_argument("build_raw_basis: d must be >= 1");
  RawBasisSpec raw;
  raw.K = K;
  raw.d = d;
  raw.entries.reserve(static_cast<std::size_t>(1 + d * (K - 1)));
  raw.entries.push_back(RawBasisEntry{});
  for (int c = 0; c < d; ++c) {
    for (int k = 1; k < K; ++k) {
      RawBasisEntry e;
      e.coordinate = c;
      e.breakpoint = k;
      e.scale = std::pow(static_cast<double>(K), -0.5) * std::pow(1.0 + 1.0 / k, -0.5);
      e.level_left = e.scale * static_cast<double>(K) / k;
      e.level_right = -e.scale * static_cast<double>(K);
      raw.entries.push_back(e);
    }
  }
  return raw;
}

Eigen::MatrixXd gram_matrix(const RawBasisSpec& raw, const DesignModel& model) {
  check_grid_alignment(raw, model);
  const int m = raw.size();
  const std::vector<ComponentFunction> profiles = contrast_profiles(raw);
  auto profile = [&](int j) -> const ComponentFunction& {
    return profiles[static_cast<std::size_t>(raw.entries[static_cast<std::size_t>(j)].breakpoint - 1)];
  };

  Eigen::MatrixXd G(m, m);
  G(0, 0) = 1.0;  // the design density integrates to one
  for (int j = 1; j < m; ++j) {
    const int cj = raw.entries[static_cast<std::size_t>(j)].coordinate;
    G(0, j) = G(j, 0) = model.mean(cj, profile(j));
    for (int i = 1; i <= j; ++i) {
      const int ci = raw.entries[static_cast<std::size_t>(i)].coordinate;
      const double v = (ci == cj) ? model.ip_same(ci, profile(i), profile(j))
                                  : model.ip_cross(ci, profile(i), cj, profile(j));
      G(i, j) = G(j, i) = v;
    }
  }
  return G;
}

OrthonormalBasis::OrthonormalBasis(RawBasisSpec raw, Eigen::MatrixXd coeffs,
                                   Eigen::VectorXd gram_eigenvalues)
    : raw_(std::move(raw)), coeffs_(std::move(coeffs)), eigenvalues_(std::move(gram_eigenvalues)) {
  const int m = raw_.size();
  const int K = raw_.K;
  base_ = coeffs_.col(0);
  tables_.reserve(static_cast<std::size_t>(raw_.d));
  // Level table of the contrasts: row k-1 = cell values of breakpoint k.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(K - 1, K);
  for (int k = 1; k < K; ++k) {
    const double s = std::pow(static_cast<double>(K), -0.5) * std::pow(1.0 + 1.0 / k, -0.5);
    for (int i = 0; i < k; ++i) T(k - 1, i) = s * static_cast<double>(K) / k;
    T(k - 1, k) = -s * static_cast<double>(K);
  }
  for (int c = 0; c < raw_.d; ++c) {
    const int off = 1 + c * (K - 1);
    tables_.push_back(coeffs_.block(0, off, m, K - 1) * T);
  }
}

const Eigen::MatrixXd& OrthonormalBasis::cell_table(int c) const {
  return tables_.at(static_cast<std::size_t>(c));
}

void OrthonormalBasis::eval_all_into(const double* x, Eigen::VectorXd& out) const {
  out = base_;
  for (int c = 0; c < raw_.d; ++c) out += tables_[static_cast<std::size_t>(c)].col(cell_index(x[c], raw_.K));
}

Eigen::VectorXd OrthonormalBasis::eval_all(const double* x) const {
  Eigen::VectorXd v;
  eval_all_into(x, v);
  return v;
}

double OrthonormalBasis::eval(int j, const double* x) const {
  double v = base_(j);
  for (int c = 0; c < raw_.d; ++c) v += tables_[static_cast<std::size_t>(c)](j, cell_index(x[c], raw_.K));
  return v;
}

double OrthonormalBasis::eval(int j, const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != raw_.d)
    throw std::invalid_argument("OrthonormalBasis::eval: dimension mismatch");
  return eval(j, x.data());
}

Eigen::MatrixXd OrthonormalBasis::eval_matrix(const Eigen::MatrixXd& X) const {
  if (X.cols() != raw_.d) throw std::invalid_argument("eval_matrix: X must be n x d");
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd out(n, size());
  Eigen::VectorXd v(size());
  for (int j = 0; j < n; ++j) {
    v = base_;
    for (int c = 0; c < raw_.d; ++c)
      v += tables_[static_cast<std::size_t>(c)].col(cell_index(X(j, c), raw_.K));
    out.row(j) = v.transpose();
  }
  return out;
}

OrthonormalBasis orthonormalize(const RawBasisSpec& raw, const Eigen::MatrixXd& gram) {
  const int m = raw.size();
  if (gram.rows() != m || gram.cols() != m)
    throw std::invalid_argument("orthonormalize: Gram matrix size mismatch");

  Eigen::MatrixXd G = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(G, Eigen::EigenvaluesOnly);
  Eigen::VectorXd eigenvalues = full.eigenvalues();
  if (eigenvalues(0) <= 1e-12)
    throw std::runtime_error("orthonormalize: Gram matrix numerically singular");

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
  const double g00 = G(0, 0);
  C(0, 0) = 1.0 / std::sqrt(g00);
  if (m > 1) {
    // Center the contrasts against the constant, then orthonormalize the
    // centered block u_j = t_j - (mu_j/g00) * t_0 whose Gram is the Schur
    // complement S = B - mu mu^T / g00; its smallest eigenvalue is >= that
    // of the full Gram matrix.
    const Eigen::VectorXd mu = G.block(1, 0, m - 1, 1);
    Eigen::MatrixXd S = G.block(1, 1, m - 1, m - 1) - mu * mu.transpose() / g00;
    bool diagonal = true;
    for (int i = 0; i < m - 1 && diagonal; ++i)
      for (int j = i + 1; j < m - 1; ++j)
        if (S(i, j) != 0.0 || S(j, i) != 0.0) {
          diagonal = false;
          break;
        }
    Eigen::MatrixXd W;  // rows = orthonormal combinations of the centered block
    if (diagonal) {
      if (S.diagonal().minCoeff() <= 1e-12)
        throw std::runtime_error("orthonormalize: Gram matrix numerically singular");
      W = S.diagonal().array().rsqrt().matrix().asDiagonal();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
      if (es.eigenvalues()(0) <= 1e-12)
        throw std::runtime_error("orthonormalize: Gram matrix numerically singular");
      W = es.eigenvalues().array().rsqrt().matrix().asDiagonal() * es.eigenvectors().transpose();
    }
    C.block(1, 1, m - 1, m - 1) = W;
    C.block(1, 0, m - 1, 1) = -W * mu / g00;
  }
  return OrthonormalBasis(raw, std::move(C), std::move(eigenvalues));
}

OrthonormalBasis build_basis(const DesignModel& model, int K) {
  RawBasisSpec raw = build_raw_basis(K, model.dimension());
  return orthonormalize(raw, gram_matrix(raw, model));
}

double lemma_sup_bound(int K, int d, double rho) {
  const double pi = 3.14159265358979323846;
  return (1.0 + static_cast<double>(K) * d * (1.0 + pi * pi / 6.0)) / rho;
}

double sup_sum_squares(const OrthonormalBasis& basis) {
  const RawBasisSpec& raw = basis.raw();
  const int K = raw.K;
  const int d = raw.d;
  const int m = raw.size();

  // sum_j psi_j(x)^2 = v(x)^T A v(x) with A = C^T C and v the raw entry
  // vector; v depends on x only through the cell index of each coordinate.
  const Eigen::MatrixXd A = basis.coeffs().transpose() * basis.coeffs();

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(K - 1, K);
  for (int k = 1; k < K; ++k) {
    const double s = std::pow(static_cast<double>(K), -0.5) * std::pow(1.0 + 1.0 / k, -0.5);
    for (int i = 0; i < k; ++i) T(k - 1, i) = s * static_cast<double>(K) / k;
    T(k - 1, k) = -s * static_cast<double>(K);
  }

  const double a00 = A(0, 0);
  // Per-coordinate cell contribution and per-pair cell-pair tables.
  std::vector<Eigen::VectorXd> q(static_cast<std::size_t>(d));
  std::vector<std::vector<Eigen::MatrixXd>> P(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) {
    const int off = 1 + c * (K - 1);
    const Eigen::MatrixXd Acc = A.block(off, off, K - 1, K - 1);
    const Eigen::RowVectorXd a0c = A.block(0, off, 1, K - 1);
    q[static_cast<std::size_t>(c)] =
        (2.0 * a0c * T).transpose() + (T.transpose() * Acc * T).diagonal();
    P[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(c));
    for (int b = 0; b < c; ++b) {
      const int offb = 1 + b * (K - 1);
      P[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)] =
          2.0 * T.transpose() * A.block(offb, off, K - 1, K - 1) * T;  // rows: cell of b
    }
  }
  (void)m;

  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd acc(K);
  // Depth-first over cell indices; the innermost coordinate is vectorized.
  std::function<void(int, double)> rec = [&](int level, double partial) {
    acc = q[static_cast<std::size_t>(level)];
    for (int b = 0; b < level; ++b)
      acc += P[static_cast<std::size_t>(level)][static_cast<std::size_t>(b)]
                 .row(idx[static_cast<std::size_t>(b)])
                 .transpose();
    if (level == d - 1) {
      const double cand = partial + acc.maxCoeff();
      if (cand > best) best = cand;
      return;
    }
    const Eigen::VectorXd saved = acc;
    for (int i = 0; i < K; ++i) {
      idx[static_cast<std::size_t>(level)] = i;
      rec(level + 1, partial + saved(i));
    }
  };
  rec(0, a00);
  return best;
}

Eigen::VectorXd project(const AdditiveFunction& g, const OrthonormalBasis& basis,
                        const DesignModel& model) {
  const RawBasisSpec& raw = basis.raw();
  if (g.dimension() != raw.d || model.dimension() != raw.d)
    throw std::invalid_argument("project: dimension mismatch");
  const int m = raw.size();
  const std::vector<ComponentFunction> profiles = contrast_profiles(raw);

  // <g, raw entry j> first, then map through the coefficient matrix.
  Eigen::VectorXd t(m);
  double total_mean = 0.0;
  std::vector<double> means(static_cast<std::size_t>(raw.d));
  for (int l = 0; l < raw.d; ++l) {
    means[static_cast<std::size_t>(l)] = model.mean(l, g.component(l));
    total_mean += means[static_cast<std::size_t>(l)];
  }
  t(0) = total_mean;
  for (int j = 1; j < m; ++j) {
    const RawBasisEntry& e = raw.entries[static_cast<std::size_t>(j)];
    const ComponentFunction& prof = profiles[static_cast<std::size_t>(e.breakpoint - 1)];
    double v = 0.0;
    for (int l = 0; l < raw.d; ++l) {
      v += (l == e.coordinate) ? model.ip_same(l, g.component(l), prof)
                               : model.ip_cross(l, g.component(l), e.coordinate, prof);
    }
    t(j) = v;
  }
  return basis.coeffs() * t;
}

double AdditiveForm::eval(const double* x) const {
  double v = constant;
  for (int c = 0; c < dimension(); ++c)
    v += levels[static_cast<std::size_t>(c)](cell_index(x[c], K));
  return v;
}

double AdditiveForm::eval(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dimension())
    throw std::invalid_argument("AdditiveForm::eval: dimension mismatch");
  return eval(x.data());
}

ComponentFunction AdditiveForm::component(int c) const {
  const Eigen::VectorXd& lv = levels.at(static_cast<std::size_t>(c));
  return ComponentFunction::piecewise(std::vector<double>(lv.data(), lv.data() + lv.size()));
}

AdditiveForm additive_form(const Eigen::VectorXd& coefficients, const OrthonormalBasis& basis) {
  if (coefficients.size() != basis.size())
    throw std::invalid_argument("additive_form: coefficient length mismatch");
  AdditiveForm form;
  form.K = basis.K();
  form.constant = coefficients.dot(basis.base());
  form.levels.reserve(static_cast<std::size_t>(basis.dimension()));
  for (int c = 0; c < basis.dimension(); ++c)
    form.levels.push_back(basis.cell_table(c).transpose() * coefficients);
  return form;
}

Eigen::MatrixXd cross_gram(const OrthonormalBasis& coarse, const OrthonormalBasis& fine,
                           const DesignModel& model) {
  const RawBasisSpec& rc = coarse.raw();
  const RawBasisSpec& rf = fine.raw();
  if (rc.d != rf.d || model.dimension() != rf.d)
    throw std::invalid_argument("cross_gram: dimension mismatch");
  const std::vector<ComponentFunction> pc = contrast_profiles(rc);
  const std::vector<ComponentFunction> pf = contrast_profiles(rf);

  // Raw cross inner products, then both coefficient maps.
  Eigen::MatrixXd G(rc.size(), rf.size());
  G(0, 0) = 1.0;
  for (int j = 1; j < rf.size(); ++j) {
    const RawBasisEntry& e = rf.entries[static_cast<std::size_t>(j)];
    G(0, j) = model.mean(e.coordinate, pf[static_cast<std::size_t>(e.breakpoint - 1)]);
  }
  for (int i = 1; i < rc.size(); ++i) {
    const RawBasisEntry& a = rc.entries[static_cast<std::size_t>(i)];
    const ComponentFunction& fa = pc[static_cast<std::size_t>(a.breakpoint - 1)];
    G(i, 0) = model.mean(a.coordinate, fa);
    for (int j = 1; j < rf.size(); ++j) {
      const RawBasisEntry& b = rf.entries[static_cast<std::size_t>(j)];
      const ComponentFunction& fb = pf[static_cast<std::size_t>(b.breakpoint - 1)];
      G(i, j) = (a.coordinate == b.coordinate)
                    ? model.ip_same(a.coordinate, fa, fb)
                    : model.ip_cross(a.coordinate, fa, b.coordinate, fb);
    }
  }
  return coarse.coeffs() * G * fine.coeffs().transpose();
}

double l2_norm_sq(const AdditiveFunction& g, const DesignModel& model) {
  if (g.dimension() != model.dimension())
    throw std::invalid_argument("l2_norm_sq: dimension mismatch");
  const int d = g.dimension();
  double v = 0.0;
  for (int l = 0; l < d; ++l) {
    v += model.mean_sq(l, g.component(l));
    for (int r = l + 1; r < d; ++r)
      v += 2.0 * model.ip_cross(l, g.component(l), r, g.component(r));
  }
  return v;
}

double l2_distance_sq(const AdditiveFunction& g, const AdditiveForm& form,
                      const DesignModel& model) {
  if (g.dimension() != form.dimension() || g.dimension() != model.dimension())
    throw std::invalid_argument("l2_distance_sq: dimension mismatch");
  const int d = g.dimension();
  std::vector<ComponentFunction> h;
  h.reserve(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) h.push_back(form.component(c));

  double gg = l2_norm_sq(g, model);
  double gh = 0.0, hh = 0.0, hmean = 0.0, gmean = 0.0;
  for (int l = 0; l < d; ++l) {
    gmean += model.mean(l, g.component(l));
    hmean += model.mean(l, h[static_cast<std::size_t>(l)]);
    gh += model.ip_same(l, g.component(l), h[static_cast<std::size_t>(l)]);
    hh += model.mean_sq(l, h[static_cast<std::size_t>(l)]);
    for (int r = 0; r < d; ++r) {
      if (r == l) continue;
      gh += model.ip_cross(l, g.component(l), r, h[static_cast<std::size_t>(r)]);
      if (r > l)
        hh += 2.0 * model.ip_cross(l, h[static_cast<std::size_t>(l)], r,
                                   h[static_cast<std::size_t>(r)]);
    }
  }
  const double a0 = form.constant;
  const double v = gg - 2.0 * (gh + a0 * gmean) + (hh + 2.0 * a0 * hmean + a0 * a0);
  return v > 0.0 ? v : 0.0;
}

ApproximationReport approximation_error(const AdditiveFunction& g, const OrthonormalBasis& basis,
                                        const DesignModel& model) {
  ApproximationReport rep;
  const Eigen::VectorXd G = project(g, basis, model);
  const double total = l2_norm_sq(g, model);
  rep.err_sq = total - G.squaredNorm();
  if (rep.err_sq < 0.0) rep.err_sq = 0.0;
  const double C = g.holder_C();
  const double beta = g.holder_beta();
  rep.bound = std::pow(static_cast<double>(basis.K()), -2.0 * beta) * C * C *
              static_cast<double>(basis.dimension()) / model.rho();
  return rep;
}

}  // namespace addwn
