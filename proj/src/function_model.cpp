#include "addwn/function_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "addwn/design_model.hpp"

namespace addwn {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double pow_abs(double u, double e) { return std::pow(std::abs(u), e); }

// ∫ |t-c|^e dt antiderivative, odd in (t-c).
double prim_abs(double t, double c, double e) {
  const double u = t - c;
  const double s = (u >= 0.0) ? 1.0 : -1.0;
  return s * pow_abs(u, e + 1.0) / (e + 1.0);
}

// ∫ t|t-c|^e dt antiderivative.
double prim_abs_t(double t, double c, double e) {
  const double u = t - c;
  return pow_abs(u, e + 2.0) / (e + 2.0) + c * prim_abs(t, c, e);
}

// ∫ t²|t-c|^e dt antiderivative.
double prim_abs_t2(double t, double c, double e) {
  const double u = t - c;
  const double s = (u >= 0.0) ? 1.0 : -1.0;
  return s * pow_abs(u, e + 3.0) / (e + 3.0) + 2.0 * c * pow_abs(u, e + 2.0) / (e + 2.0) +
         c * c * prim_abs(t, c, e);
}

void check_interval(double a, double b) {
  if (!(a >= -1e-12 && b <= 1.0 + 1e-12 && a <= b + 1e-12))
    throw std::invalid_argument("ComponentFunction: integration interval must satisfy 0<=a<=b<=1");
}

}  // namespace

ComponentFunction ComponentFunction::constant(double value) {
  ComponentFunction f;
  f.kind_ = ShapeKind::constant;
  f.c0_ = value;
  return f;
}

ComponentFunction ComponentFunction::linear(double intercept, double slope) {
  ComponentFunction f;
  f.kind_ = ShapeKind::linear;
  f.c0_ = intercept;
  f.c1_ = slope;
  return f;
}

ComponentFunction ComponentFunction::sine(double amplitude, int frequency) {
  if (frequency < 1) throw std::invalid_argument("sine: frequency must be a positive integer");
  ComponentFunction f;
  f.kind_ = ShapeKind::sine;
  f.c1_ = amplitude;
  f.freq_ = frequency;
  return f;
}

ComponentFunction ComponentFunction::holder_bump(double amplitude, double beta, double center) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument(
        "holder_bump: exponent must lie in (0,1]; smoother classes are not part of this model");
  if (!(center >= 0.0 && center <= 1.0))
    throw std::invalid_argument("holder_bump: center must lie in [0,1]");
  ComponentFunction f;
  f.kind_ = ShapeKind::holder_bump;
  f.c1_ = amplitude;
  f.beta_ = beta;
  f.center_ = center;
  return f;
}

ComponentFunction ComponentFunction::piecewise(std::vector<double> levels) {
  if (levels.empty()) throw std::invalid_argument("piecewise: needs at least one level");
  ComponentFunction f;
  f.kind_ = ShapeKind::piecewise_constant;
  f.levels_ = std::move(levels);
  return f;
}

double ComponentFunction::eval(double t) const {
  switch (kind_) {
    case ShapeKind::constant:
      return c0_ + shift_;
    case ShapeKind::linear:
      return c0_ + c1_ * t + shift_;
    case ShapeKind::sine:
      return c1_ * std::sin(kTwoPi * freq_ * t) + shift_;
    case ShapeKind::holder_bump:
      return c1_ * (1.0 - pow_abs(t - center_, beta_)) + shift_;
    case ShapeKind::piecewise_constant: {
      const int b = static_cast<int>(levels_.size());
      int i = static_cast<int>(std::floor(t * b));
      i = std::clamp(i, 0, b - 1);
      return levels_[static_cast<std::size_t>(i)] + shift_;
    }
  }
  return 0.0;
}

ComponentFunction ComponentFunction::shifted(double delta) const {
  ComponentFunction f = *this;
  f.shift_ += delta;
  return f;
}

double ComponentFunction::integral(double a, double b) const {
  check_interval(a, b);
  const double len = b - a;
  switch (kind_) {
    case ShapeKind::constant:
      return (c0_ + shift_) * len;
    case ShapeKind::linear:
      return (c0_ + shift_) * len + 0.5 * c1_ * (b * b - a * a);
    case ShapeKind::sine: {
      const double w = kTwoPi * freq_;
      return -c1_ / w * (std::cos(w * b) - std::cos(w * a)) + shift_ * len;
    }
    case ShapeKind::holder_bump:
      return (c1_ + shift_) * len - c1_ * (prim_abs(b, center_, beta_) - prim_abs(a, center_, beta_));
    case ShapeKind::piecewise_constant: {
      const int nb = static_cast<int>(levels_.size());
      double s = 0.0;
      for (int i = 0; i < nb; ++i) {
        const double lo = std::max(a, static_cast<double>(i) / nb);
        const double hi = std::min(b, static_cast<double>(i + 1) / nb);
        if (hi > lo) s += (levels_[static_cast<std::size_t>(i)] + shift_) * (hi - lo);
      }
      return s;
    }
  }
  return 0.0;
}

double ComponentFunction::integral_t(double a, double b) const {
  check_interval(a, b);
  const double m1 = 0.5 * (b * b - a * a);
  switch (kind_) {
    case ShapeKind::constant:
      return (c0_ + shift_) * m1;
    case ShapeKind::linear:
      return (c0_ + shift_) * m1 + c1_ * (b * b * b - a * a * a) / 3.0;
    case ShapeKind::sine: {
      const double w = kTwoPi * freq_;
      auto prim = [&](double t) { return std::sin(w * t) / (w * w) - t * std::cos(w * t) / w; };
      return c1_ * (prim(b) - prim(a)) + shift_ * m1;
    }
    case ShapeKind::holder_bump:
      return (c1_ + shift_) * m1 -
             c1_ * (prim_abs_t(b, center_, beta_) - prim_abs_t(a, center_, beta_));
    case ShapeKind::piecewise_constant: {
      const int nb = static_cast<int>(levels_.size());
      double s = 0.0;
      for (int i = 0; i < nb; ++i) {
        const double lo = std::max(a, static_cast<double>(i) / nb);
        const double hi = std::min(b, static_cast<double>(i + 1) / nb);
        if (hi > lo) s += (levels_[static_cast<std::size_t>(i)] + shift_) * 0.5 * (hi * hi - lo * lo);
      }
      return s;
    }
  }
  return 0.0;
}

double ComponentFunction::integral_t2(double a, double b) const {
  check_interval(a, b);
  const double m2 = (b * b * b - a * a * a) / 3.0;
  switch (kind_) {
    case ShapeKind::constant:
      return (c0_ + shift_) * m2;
    case ShapeKind::linear:
      return (c0_ + shift_) * m2 + 0.25 * c1_ * (b * b * b * b - a * a * a * a);
    case ShapeKind::sine: {
      const double w = kTwoPi * freq_;
      auto prim = [&](double t) {
        return -t * t * std::cos(w * t) / w + 2.0 * t * std::sin(w * t) / (w * w) +
               2.0 * std::cos(w * t) / (w * w * w);
      };
      return c1_ * (prim(b) - prim(a)) + shift_ * m2;
    }
    case ShapeKind::holder_bump:
      return (c1_ + shift_) * m2 -
             c1_ * (prim_abs_t2(b, center_, beta_) - prim_abs_t2(a, center_, beta_));
    case ShapeKind::piecewise_constant: {
      const int nb = static_cast<int>(levels_.size());
      double s = 0.0;
      for (int i = 0; i < nb; ++i) {
        const double lo = std::max(a, static_cast<double>(i) / nb);
        const double hi = std::min(b, static_cast<double>(i + 1) / nb);
        if (hi > lo)
          s += (levels_[static_cast<std::size_t>(i)] + shift_) * (hi * hi * hi - lo * lo * lo) / 3.0;
      }
      return s;
    }
  }
  return 0.0;
}

double ComponentFunction::integral_sq(double a, double b) const {
  check_interval(a, b);
  const double len = b - a;
  switch (kind_) {
    case ShapeKind::constant: {
      const double v = c0_ + shift_;
      return v * v * len;
    }
    case ShapeKind::linear: {
      const double i0 = c0_ + shift_, k = c1_;
      return i0 * i0 * len + i0 * k * (b * b - a * a) + k * k * (b * b * b - a * a * a) / 3.0;
    }
    case ShapeKind::sine: {
      const double w = kTwoPi * freq_, A = c1_, s = shift_;
      const double int_sin2 = 0.5 * len - (std::sin(2.0 * w * b) - std::sin(2.0 * w * a)) / (4.0 * w);
      const double int_sin = -(std::cos(w * b) - std::cos(w * a)) / w;
      return A * A * int_sin2 + 2.0 * A * s * int_sin + s * s * len;
    }
    case ShapeKind::holder_bump: {
      // (A + s - A|u|^b)^2 = (A+s)^2 - 2A(A+s)|u|^b + A^2 |u|^{2b}
      const double A = c1_, s = shift_;
      const double p_b = prim_abs(b, center_, beta_) - prim_abs(a, center_, beta_);
      const double p_2b = prim_abs(b, center_, 2.0 * beta_) - prim_abs(a, center_, 2.0 * beta_);
      return (A + s) * (A + s) * len - 2.0 * A * (A + s) * p_b + A * A * p_2b;
    }
    case ShapeKind::piecewise_constant: {
      const int nb = static_cast<int>(levels_.size());
      double s = 0.0;
      for (int i = 0; i < nb; ++i) {
        const double lo = std::max(a, static_cast<double>(i) / nb);
        const double hi = std::min(b, static_cast<double>(i + 1) / nb);
        if (hi > lo) {
          const double v = levels_[static_cast<std::size_t>(i)] + shift_;
          s += v * v * (hi - lo);
        }
      }
      return s;
    }
  }
  return 0.0;
}

double ComponentFunction::sup_abs() const {
  switch (kind_) {
    case ShapeKind::constant:
      return std::abs(c0_ + shift_);
    case ShapeKind::linear:
      return std::max(std::abs(c0_ + shift_), std::abs(c0_ + c1_ + shift_));
    case ShapeKind::sine:
      // integer frequency: both extremes +-A are attained on [0,1]
      return std::max(std::abs(c1_ + shift_), std::abs(shift_ - c1_));
    case ShapeKind::holder_bump: {
      const double far = std::max(center_, 1.0 - center_);
      const double lo = c1_ * (1.0 - std::pow(far, beta_)) + shift_;
      const double hi = c1_ + shift_;
      return std::max(std::abs(lo), std::abs(hi));
    }
    case ShapeKind::piecewise_constant: {
      double m = 0.0;
      for (double v : levels_) m = std::max(m, std::abs(v + shift_));
      return m;
    }
  }
  return 0.0;
}

double ComponentFunction::holder_constant(double beta) const {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("holder_constant: exponent must lie in (0,1]");
  switch (kind_) {
    case ShapeKind::constant:
      return 0.0;
    case ShapeKind::linear:
      // |x-y| <= |x-y|^beta on [0,1], so the Lipschitz constant certifies
      // every exponent beta <= 1.
      return std::abs(c1_);
    case ShapeKind::sine:
      return std::abs(c1_) * kTwoPi * freq_;
    case ShapeKind::holder_bump:
      return beta <= beta_ + 1e-15 ? std::abs(c1_) : std::numeric_limits<double>::infinity();
    case ShapeKind::piecewise_constant: {
      const double lo = *std::min_element(levels_.begin(), levels_.end());
      const double hi = *std::max_element(levels_.begin(), levels_.end());
      return hi - lo == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }
  return 0.0;
}

std::vector<double> ComponentFunction::breakpoints() const {
  switch (kind_) {
    case ShapeKind::holder_bump:
      return {0.0, center_, 1.0};
    case ShapeKind::piecewise_constant: {
      std::vector<double> v(levels_.size() + 1);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) / levels_.size();
      return v;
    }
    default:
      return {0.0, 1.0};
  }
}

std::string ComponentFunction::describe() const {
  char buf[128];
  switch (kind_) {
    case ShapeKind::constant:
      std::snprintf(buf, sizeof buf, "constant(%g)", c0_ + shift_);
      break;
    case ShapeKind::linear:
      std::snprintf(buf, sizeof buf, "linear(%g,%g)", c0_ + shift_, c1_);
      break;
    case ShapeKind::sine:
      std::snprintf(buf, sizeof buf, "sine(%g,%d)+%g", c1_, freq_, shift_);
      break;
    case ShapeKind::holder_bump:
      std::snprintf(buf, sizeof buf, "bump(%g,%g,%g)+%g", c1_, beta_, center_, shift_);
      break;
    case ShapeKind::piecewise_constant:
      std::snprintf(buf, sizeof buf, "piecewise(%zu)+%g", levels_.size(), shift_);
      break;
  }
  return buf;
}

AdditiveFunction::AdditiveFunction(std::vector<ComponentFunction> components, double holder_C,
                                   double holder_beta)
    : components_(std::move(components)), holder_C_(holder_C), holder_beta_(holder_beta) {
  if (components_.empty()) throw std::invalid_argument("AdditiveFunction: needs >= 1 component");
  if (!(holder_C_ >= 0.0))
    throw std::invalid_argument("AdditiveFunction: holder_C must be nonnegative");
  if (!(holder_beta_ > 0.0 && holder_beta_ <= 1.0))
    throw std::invalid_argument(
        "AdditiveFunction: smoothness exponent must lie in (0,1]; classes with beta > 1 are not "
        "supported by this model");
}

double AdditiveFunction::eval(const double* x, int d) const {
  if (d != dimension()) throw std::invalid_argument("AdditiveFunction::eval: dimension mismatch");
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += components_[static_cast<std::size_t>(k)].eval(x[k]);
  return s;
}

double AdditiveFunction::eval(const std::vector<double>& x) const {
  return eval(x.data(), static_cast<int>(x.size()));
}

CenteredDecomposition center_components(const AdditiveFunction& g,
                                        const std::vector<PiecewiseDensity>& marginals) {
  if (static_cast<int>(marginals.size()) != g.dimension())
    throw std::invalid_argument("center_components: one marginal per component required");
  CenteredDecomposition out;
  out.centered.reserve(static_cast<std::size_t>(g.dimension()));
  for (int k = 0; k < g.dimension(); ++k) {
    const double mean = marginals[static_cast<std::size_t>(k)].integral_against(g.component(k));
    out.g0 += mean;
    out.centered.push_back(g.component(k).shifted(-mean));
  }
  return out;
}

HolderCertificate holder_certificate(const AdditiveFunction& g, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("holder_certificate: grid_size must be >= 2");
  HolderCertificate cert;
  const double beta = g.holder_beta();
  for (int k = 0; k < g.dimension(); ++k) {
    const ComponentFunction& f = g.component(k);
    std::vector<double> vals(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i) {
      const double t = static_cast<double>(i) / (grid_size - 1);
      vals[static_cast<std::size_t>(i)] = f.eval(t);
      cert.c_emp = std::max(cert.c_emp, std::abs(vals[static_cast<std::size_t>(i)]));
    }
    for (int i = 0; i < grid_size; ++i) {
      for (int j = i + 1; j < grid_size; ++j) {
        const double dt = static_cast<double>(j - i) / (grid_size - 1);
        const double ratio =
            std::abs(vals[static_cast<std::size_t>(j)] - vals[static_cast<std::size_t>(i)]) /
            std::pow(dt, beta);
        cert.c_emp = std::max(cert.c_emp, ratio);
      }
    }
  }
  cert.ok = cert.c_emp <= g.holder_C() + 1e-9;
  return cert;
}

}  // namespace addwn
