#pragma once

#include <limits>
#include <string>
#include <vector>

namespace addwn {

class PiecewiseDensity;

// Univariate component shapes.  Every kind has closed-form moment integrals
// (∫f, ∫t·f, ∫t²·f, ∫f²) over subintervals of [0,1], which keeps projection
// coefficients, Gram entries and norm computations exact; no quadrature error
// enters the production path.
enum class ShapeKind { constant, linear, sine, holder_bump, piecewise_constant };

class ComponentFunction {
 public:
  static ComponentFunction constant(double value);
  static ComponentFunction linear(double intercept, double slope);
  // amplitude * sin(2*pi*frequency*t), integer frequency >= 1
  static ComponentFunction sine(double amplitude, int frequency);
  // amplitude * (1 - |t - center|^beta), beta in (0,1]; exactly beta-Hoelder
  // with constant |amplitude|.
  static ComponentFunction holder_bump(double amplitude, double beta, double center);
  // constant levels on uniform bins of [0,1]
  static ComponentFunction piecewise(std::vector<double> levels);

  ShapeKind kind() const { return kind_; }
  double eval(double t) const;

  // The same shape shifted by an additive constant (used by centering).
  ComponentFunction shifted(double delta) const;

  // Exact integrals over [a,b] ⊆ [0,1].
  double integral(double a, double b) const;
  double integral_t(double a, double b) const;
  double integral_t2(double a, double b) const;
  double integral_sq(double a, double b) const;

  // Exact sup of |f| over [0,1].
  double sup_abs() const;

  // Smallest constant L with |f(x)-f(y)| <= L|x-y|^beta on [0,1], or +inf if
  // the shape is not beta-Hoelder (e.g. a genuine step function, or a bump
  // rougher than the requested exponent).
  double holder_constant(double beta) const;

  // Breakpoints where the shape is non-smooth (bin edges, bump center).
  std::vector<double> breakpoints() const;

  const std::vector<double>& levels() const { return levels_; }
  double shift() const { return shift_; }
  std::string describe() const;

 private:
  ComponentFunction() = default;

  ShapeKind kind_ = ShapeKind::constant;
  double c0_ = 0.0;                  // constant value / intercept
  double c1_ = 0.0;                  // slope / amplitude
  int freq_ = 1;                     // sine cycles
  double beta_ = 1.0;                // bump exponent
  double center_ = 0.5;              // bump center
  std::vector<double> levels_;       // piecewise levels
  double shift_ = 0.0;               // additive offset
};

// Additive function g(x) = sum_k g_k(x_k) with a declared smoothness class:
// each component is claimed to be beta-Hoelder with constant C and bounded by
// C in sup norm.
class AdditiveFunction {
 public:
  AdditiveFunction(std::vector<ComponentFunction> components, double holder_C, double holder_beta);

  int dimension() const { return static_cast<int>(components_.size()); }
  const ComponentFunction& component(int k) const { return components_.at(k); }
  const std::vector<ComponentFunction>& components() const { return components_; }
  double holder_C() const { return holder_C_; }
  double holder_beta() const { return holder_beta_; }

  double eval(const double* x, int d) const;
  double eval(const std::vector<double>& x) const;

 private:
  std::vector<ComponentFunction> components_;
  double holder_C_;
  double holder_beta_;
};

// g_0 + sum_k g_k* with E[g_k*(X_k)] = 0 under the marginals used to center.
struct CenteredDecomposition {
  double g0 = 0.0;
  std::vector<ComponentFunction> centered;
};

// Exact centering against piecewise-constant marginals: g0 collects the
// component means, each component is shifted by minus its mean.
CenteredDecomposition center_components(const AdditiveFunction& g,
                                        const std::vector<PiecewiseDensity>& marginals);

struct HolderCertificate {
  double c_emp = 0.0;  // max over components of grid Hoelder ratio and sup|g_k|
  bool ok = false;     // c_emp <= declared C + 1e-9
};

// Empirical check of the declared class on a uniform grid of `grid_size`
// points per coordinate (all pairs).  Monotone in grid_size on nested grids
// and never exceeds the analytic constant.
HolderCertificate holder_certificate(const AdditiveFunction& g, int grid_size);

}  // namespace addwn
