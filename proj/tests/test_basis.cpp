#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "addwn/basis.hpp"
#include "addwn/design_model.hpp"
#include "addwn/function_model.hpp"
#include "addwn/rng.hpp"
#include "test_helpers.hpp"

using addwn::AdditiveForm;
using addwn::AdditiveFunction;
using addwn::ComponentFunction;
using addwn::DesignModel;
using addwn::OrthonormalBasis;
using addwn::PiecewiseDensity;
using addwn::RawBasisSpec;

namespace {

// Independent route to <a, b>_{p_X} for additive forms: expands the product
// over the model's exact one- and two-coordinate integrals, without touching
// the basis coefficient algebra under test.
double form_ip(const AdditiveForm& a, const AdditiveForm& b, const DesignModel& model) {
  const int d = a.dimension();
  double v = a.constant * b.constant;
  for (int l = 0; l < d; ++l) {
    v += a.constant * model.mean(l, b.component(l));
    v += b.constant * model.mean(l, a.component(l));
    v += model.ip_same(l, a.component(l), b.component(l));
    for (int r = 0; r < d; ++r) {
      if (r == l) continue;
      v += model.ip_cross(l, a.component(l), r, b.component(r));
    }
  }
  return v;
}

DesignModel uniform_model(int d, int bins = 1) {
  return DesignModel::product(std::vector<PiecewiseDensity>(static_cast<std::size_t>(d),
                                                            PiecewiseDensity::uniform(bins)),
                              1.0);
}

}  // namespace

TEST_CASE("raw basis: enumeration order and frozen contrast levels") {
  const RawBasisSpec two = addwn::build_raw_basis(2, 1);
  REQUIRE(two.size() == 2);
  CHECK(two.entries[0].coordinate == -1);
  CHECK(two.entries[1].coordinate == 0);
  CHECK(two.entries[1].breakpoint == 1);
  // 2^{-1/2} * 2^{-1/2} * {2, -2} = {1, -1}
  CHECK(two.entries[1].scale == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two.eval(1, std::vector<double>{0.25}.data()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(two.eval(1, std::vector<double>{0.75}.data()) == doctest::Approx(-1.0).epsilon(1e-15));

  const RawBasisSpec big = addwn::build_raw_basis(4, 2);
  REQUIRE(big.size() == 7);  // 1 + 2*(4-1)
  for (int k = 1; k <= 3; ++k) {
    CHECK(big.entries[static_cast<std::size_t>(k)].coordinate == 0);
    CHECK(big.entries[static_cast<std::size_t>(k)].breakpoint == k);
    CHECK(big.entries[static_cast<std::size_t>(k + 3)].coordinate == 1);
    CHECK(big.entries[static_cast<std::size_t>(k + 3)].breakpoint == k);
  }

  // K=3, breakpoint 2: scale 3^{-1/2}(3/2)^{-1/2}, levels 3/2 and -3 scaled.
  const RawBasisSpec three = addwn::build_raw_basis(3, 1);
  const addwn::RawBasisEntry& e = three.entries[2];
  CHECK(e.scale == doctest::Approx(0.4714045207910317).epsilon(1e-14));
  CHECK(e.level_left == doctest::Approx(0.7071067811865476).epsilon(1e-14));
  CHECK(e.level_right == doctest::Approx(-1.4142135623730951).epsilon(1e-14));
  const double x_lo = 0.1, x_hi = 0.8;
  CHECK(three.eval(2, &x_lo) == doctest::Approx(0.7071067811865476).epsilon(1e-14));
  CHECK(three.eval(2, &x_hi) == doctest::Approx(-1.4142135623730951).epsilon(1e-14));

  CHECK_THROWS_AS(addwn::build_raw_basis(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(addwn::build_raw_basis(4, 0), std::invalid_argument);
}

TEST_CASE("raw contrasts: zero mean and unit norm on the uniform density") {
  const RawBasisSpec raw = addwn::build_raw_basis(5, 1);
  for (int j = 1; j < raw.size(); ++j) {
    const ComponentFunction f = raw.component(j);
    CHECK(std::abs(f.integral(0.0, 1.0)) < 1e-14);
    CHECK(f.integral_sq(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("gram matrix: uniform products give the identity") {
  for (const auto& [K, d, bins] : std::vector<std::tuple<int, int, int>>{
           {4, 2, 1}, {4, 1, 8}, {8, 3, 8}, {2, 1, 2}}) {
    const DesignModel model = uniform_model(d, bins);
    const RawBasisSpec raw = addwn::build_raw_basis(K, d);
    const Eigen::MatrixXd G = addwn::gram_matrix(raw, model);
    CHECK((G - Eigen::MatrixXd::Identity(raw.size(), raw.size())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gram matrix: misaligned marginal grids are rejected") {
  const DesignModel bad = DesignModel::product({PiecewiseDensity::uniform(3)}, 0.9);
  CHECK_THROWS_AS(addwn::gram_matrix(addwn::build_raw_basis(2, 1), bad), std::invalid_argument);
  const DesignModel bad2 = DesignModel::product({PiecewiseDensity::uniform(6)}, 0.9);
  CHECK_THROWS_AS(addwn::gram_matrix(addwn::build_raw_basis(4, 1), bad2), std::invalid_argument);
  // nesting either way is accepted
  const DesignModel coarse = DesignModel::product({PiecewiseDensity::uniform(2)}, 1.0);
  CHECK_NOTHROW(addwn::gram_matrix(addwn::build_raw_basis(4, 1), coarse));
  const DesignModel fine = DesignModel::product({PiecewiseDensity::uniform(8)}, 1.0);
  CHECK_NOTHROW(addwn::gram_matrix(addwn::build_raw_basis(4, 1), fine));
}

TEST_CASE("gram matrix and eigenvalues: two-bin step density") {
  // p = 0.5 on [0,.5), 1.5 on [.5,1):  Gram = [[1, -0.5], [-0.5, 1]].
  const DesignModel model = DesignModel::product(
      {PiecewiseDensity::from_weights({0.5, 1.5})}, 0.5);
  const RawBasisSpec raw = addwn::build_raw_basis(2, 1);
  const Eigen::MatrixXd G = addwn::gram_matrix(raw, model);
  CHECK(G(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(G(0, 1) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(G(1, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(G(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

  const OrthonormalBasis basis = addwn::orthonormalize(raw, G);
  REQUIRE(basis.gram_eigenvalues().size() == 2);
  CHECK(basis.gram_eigenvalues()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(basis.gram_eigenvalues()(1) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(basis.gram_eigenvalues()(0) >= model.rho() - 1e-10);

  // Orthonormality re-verified by exact bin sums: every function is constant
  // on the two half cells, with density values 0.5 and 1.5.
  const double xs[2] = {0.25, 0.75};
  const double pv[2] = {0.5, 1.5};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double ip = 0.0;
      for (int cell = 0; cell < 2; ++cell)
        ip += basis.eval(i, &xs[cell]) * basis.eval(j, &xs[cell]) * pv[cell] * 0.5;
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("orthonormalize: exact identity gram keeps the raw system") {
  const RawBasisSpec raw = addwn::build_raw_basis(4, 2);
  const OrthonormalBasis basis =
      addwn::orthonormalize(raw, Eigen::MatrixXd::Identity(raw.size(), raw.size()));
  CHECK((basis.coeffs() - Eigen::MatrixXd::Identity(raw.size(), raw.size()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(basis.gram_eigenvalues().minCoeff() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("orthonormalize: singular or malformed gram is rejected") {
  const RawBasisSpec raw = addwn::build_raw_basis(2, 1);
  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(addwn::orthonormalize(raw, singular), std::runtime_error);
  CHECK_THROWS_AS(addwn::orthonormalize(raw, Eigen::MatrixXd::Identity(3, 3)),
                  std::invalid_argument);
}

TEST_CASE("hand oracle: three-bin step density orthonormality by direct sums") {
  // Everything is constant on thirds, so <psi_i, psi_j> is an exact sum of
  // three products; this route never touches the production integral code.
  const std::vector<double> w{0.6, 1.2, 1.2};
  const DesignModel model = DesignModel::product({PiecewiseDensity::from_weights(w)}, 0.5);
  const double total = (0.6 + 1.2 + 1.2) / 3.0;
  const double pv[3] = {0.6 / total, 1.2 / total, 1.2 / total};
  const OrthonormalBasis basis = addwn::build_basis(model, 3);
  const double xs[3] = {1.0 / 6.0, 0.5, 5.0 / 6.0};
  for (int i = 0; i < basis.size(); ++i) {
    for (int j = 0; j <= i; ++j) {
      double ip = 0.0;
      for (int cell = 0; cell < 3; ++cell)
        ip += basis.eval(i, &xs[cell]) * basis.eval(j, &xs[cell]) * pv[cell] / 3.0;
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("property: random admissible models give orthonormal bases above the rho floor") {
  addwn::RngStream rng(20240817u);
  const std::vector<std::tuple<int, int, int, bool>> cases{
      {2, 1, 4, false}, {3, 2, 3, true}, {4, 2, 4, true},
      {8, 1, 8, false}, {4, 3, 4, true}, {3, 3, 3, false}};
  for (const auto& [K, d, bins, couple] : cases) {
    addwn::RngStream sub = rng.substream(static_cast<std::uint64_t>(K * 100 + d * 10 + bins));
    const DesignModel model = testutil::random_step_model(sub, d, bins, couple);
    const OrthonormalBasis basis = addwn::build_basis(model, K);

    CHECK(basis.gram_eigenvalues().minCoeff() >= model.rho() - 1e-10);

    // Orthonormality via the additive-form route (independent composition).
    Eigen::MatrixXd ip(basis.size(), basis.size());
    std::vector<AdditiveForm> forms;
    for (int j = 0; j < basis.size(); ++j)
      forms.push_back(addwn::additive_form(Eigen::VectorXd::Unit(basis.size(), j), basis));
    for (int i = 0; i < basis.size(); ++i)
      for (int j = 0; j <= i; ++j) ip(i, j) = ip(j, i) = form_ip(forms[static_cast<std::size_t>(i)],
                                                                forms[static_cast<std::size_t>(j)], model);
    CHECK((ip - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff() <
          1e-8);

    // Exact sup of the squared sum: matches brute-force cell enumeration and
    // respects the analytic ceiling.
    const double sup = addwn::sup_sum_squares(basis);
    CHECK(sup <= addwn::lemma_sup_bound(K, d, model.rho()) + 1e-9);
    double brute = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    const int cells = static_cast<int>(std::pow(static_cast<double>(K), d) + 0.5);
    for (int flat = 0; flat < cells; ++flat) {
      int rem = flat;
      for (int c = 0; c < d; ++c) {
        idx[static_cast<std::size_t>(c)] = rem % K;
        rem /= K;
        x[static_cast<std::size_t>(c)] = (idx[static_cast<std::size_t>(c)] + 0.5) / K;
      }
      brute = std::max(brute, basis.eval_all(x.data()).squaredNorm());
    }
    CHECK(sup == doctest::Approx(brute).epsilon(1e-10));
  }
}

TEST_CASE("projection: linear function on the uniform design, frozen coefficients") {
  const DesignModel model = uniform_model(1);
  const OrthonormalBasis basis = addwn::build_basis(model, 2);
  const AdditiveFunction g({ComponentFunction::linear(0.0, 1.0)}, 1.0, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, model);
  REQUIRE(G.size() == 2);
  CHECK(G(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(G(1) == doctest::Approx(-0.25).epsilon(1e-14));

  const auto rep = addwn::approximation_error(g, basis, model);
  CHECK(rep.err_sq == doctest::Approx(1.0 / 48.0).epsilon(1e-12));
  CHECK(rep.bound == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(rep.err_sq <= rep.bound);
}

TEST_CASE("approximation error: exact rate constant for the linear function") {
  const DesignModel model = uniform_model(1);
  const AdditiveFunction g({ComponentFunction::linear(0.0, 1.0)}, 1.0, 1.0);
  for (int K : {2, 4, 8, 16}) {
    const OrthonormalBasis basis = addwn::build_basis(model, K);
    const auto rep = addwn::approximation_error(g, basis, model);
    // || x - best histogram ||^2 = 1/(12 K^2) exactly
    CHECK(rep.err_sq * 12.0 * K * K == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.bound == doctest::Approx(std::pow(K, -2.0)).epsilon(1e-13));
    CHECK(rep.err_sq <= rep.bound);

    // Parseval route equals the direct quadrature route.
    const Eigen::VectorXd G = addwn::project(g, basis, model);
    const double direct = addwn::l2_distance_sq(g, addwn::additive_form(G, basis), model);
    CHECK(direct == doctest::Approx(rep.err_sq).epsilon(1e-10));
  }
  const OrthonormalBasis b4 = addwn::build_basis(model, 4);
  CHECK(addwn::approximation_error(g, b4, model).err_sq ==
        doctest::Approx(1.0 / 192.0).epsilon(1e-12));
}

TEST_CASE("approximation error: zero function has zero error and zero ceiling") {
  const DesignModel model = uniform_model(2);
  const OrthonormalBasis basis = addwn::build_basis(model, 4);
  const AdditiveFunction zero(
      {ComponentFunction::constant(0.0), ComponentFunction::constant(0.0)}, 0.0, 1.0);
  const auto rep = addwn::approximation_error(zero, basis, model);
  CHECK(rep.err_sq == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rep.bound == 0.0);
}

TEST_CASE("projection: constants map to the first coefficient under any model") {
  const DesignModel fgm = DesignModel::pairwise_perturbed(
      {PiecewiseDensity::from_weights({1.2, 0.8, 0.6, 1.4}),
       PiecewiseDensity::from_weights({0.9, 1.1, 1.3, 0.7})},
      {{0, 1, 0.5}}, {addwn::ScoreKind::linear, addwn::ScoreKind::linear}, 0.25);
  const OrthonormalBasis basis = addwn::build_basis(fgm, 4);
  const AdditiveFunction g(
      {ComponentFunction::constant(1.7), ComponentFunction::constant(0.0)}, 1.7, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, fgm);
  CHECK(G(0) == doctest::Approx(1.7).epsilon(1e-12));
  for (int j = 1; j < G.size(); ++j) CHECK(std::abs(G(j)) < 1e-12);

  // and the reconstruction is the constant itself
  const AdditiveForm form = addwn::additive_form(G, basis);
  for (double t : {0.05, 0.33, 0.71, 0.99}) {
    const double x[2] = {t, 1.0 - t};
    CHECK(form.eval(x) == doctest::Approx(1.7).epsilon(1e-12));
  }
}

TEST_CASE("projection reproduces histogram members exactly") {
  addwn::RngStream rng(31415u);
  const DesignModel model = testutil::random_step_model(rng, 2, 4, true);
  const OrthonormalBasis basis = addwn::build_basis(model, 4);
  std::vector<double> lv1, lv2;
  for (int i = 0; i < 4; ++i) {
    lv1.push_back(rng.gaussian());
    lv2.push_back(rng.gaussian());
  }
  const AdditiveFunction g(
      {ComponentFunction::piecewise(lv1), ComponentFunction::piecewise(lv2)}, 10.0, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, model);
  const AdditiveForm form = addwn::additive_form(G, basis);
  CHECK(addwn::l2_distance_sq(g, form, model) < 1e-12);
  for (int t = 0; t < 20; ++t) {
    const double x[2] = {rng.uniform(), rng.uniform()};
    CHECK(form.eval(x) == doctest::Approx(g.eval(x, 2)).epsilon(1e-9));
  }
}

TEST_CASE("cross gram: frozen uniform case and nested-basis row orthonormality") {
  const DesignModel model = uniform_model(1);
  const addwn::RawBasisSpec raw2 = addwn::build_raw_basis(2, 1);
  const addwn::RawBasisSpec raw4 = addwn::build_raw_basis(4, 1);
  const OrthonormalBasis coarse =
      addwn::orthonormalize(raw2, Eigen::MatrixXd::Identity(2, 2));
  const OrthonormalBasis fine = addwn::orthonormalize(raw4, Eigen::MatrixXd::Identity(4, 4));
  const Eigen::MatrixXd B = addwn::cross_gram(coarse, fine, model);
  REQUIRE(B.rows() == 2);
  REQUIRE(B.cols() == 4);
  CHECK(B(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(B(0, 1)) < 1e-14);
  CHECK(std::abs(B(0, 2)) < 1e-14);
  CHECK(std::abs(B(0, 3)) < 1e-14);
  CHECK(std::abs(B(1, 0)) < 1e-14);
  CHECK(std::abs(B(1, 1)) < 1e-14);  // half-split contrast is blind to the quarter split
  CHECK(B(1, 2) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-13));
  CHECK(B(1, 3) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-13));
  CHECK((B * B.transpose() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cross gram: coarse rows stay orthonormal inside the fine span on step models") {
  addwn::RngStream rng(99u);
  const DesignModel model = testutil::random_step_model(rng, 2, 8, true);
  const OrthonormalBasis coarse = addwn::build_basis(model, 4);
  const OrthonormalBasis fine = addwn::build_basis(model, 8);
  const Eigen::MatrixXd B = addwn::cross_gram(coarse, fine, model);
  CHECK((B * B.transpose() - Eigen::MatrixXd::Identity(coarse.size(), coarse.size()))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("sup sum of squares: uniform two-bin case is exactly two") {
  const DesignModel model = uniform_model(1);
  const OrthonormalBasis basis = addwn::build_basis(model, 2);
  CHECK(addwn::sup_sum_squares(basis) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(addwn::lemma_sup_bound(2, 1, 1.0) == doctest::Approx(6.289868133696453).epsilon(1e-13));
  CHECK(addwn::sup_sum_squares(basis) <= addwn::lemma_sup_bound(2, 1, 1.0));
}

TEST_CASE("basis evaluation: matrix route equals pointwise route") {
  addwn::RngStream rng(555u);
  const DesignModel model = testutil::random_step_model(rng, 3, 4, true);
  const OrthonormalBasis basis = addwn::build_basis(model, 4);
  const Eigen::MatrixXd X = model.sample(50, rng);
  const Eigen::MatrixXd Psi = basis.eval_matrix(X);
  REQUIRE(Psi.rows() == 50);
  REQUIRE(Psi.cols() == basis.size());
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd xi = X.row(i);  // contiguous copy of the covariate row
    const Eigen::VectorXd v = basis.eval_all(xi.data());
    CHECK((Psi.row(i).transpose() - v).cwiseAbs().maxCoeff() < 1e-14);
    for (int j = 0; j < basis.size(); ++j)
      CHECK(basis.eval(j, xi.data()) == doctest::Approx(v(j)).epsilon(1e-14));
  }
}
