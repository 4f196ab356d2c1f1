#include "addwn/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace addwn::quad {

namespace {

// Newton iteration on the Legendre polynomial; standard construction of the
// Gauss-Legendre rule, accurate to machine precision for the orders used here.
GaussRule build_rule(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order must be in [1,64]");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

double integrate_panel(const std::function<double(double)>& f, double a, double b, int order) {
  const GaussRule& r = gauss_legendre(order);
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < order; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
  return s * h;
}

double integrate_cells(const std::function<double(double)>& f, const std::vector<double>& breaks,
                       int order) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) s += integrate_panel(f, breaks[i], breaks[i + 1], order);
  }
  return s;
}

double integrate01(const std::function<double(double)>& f, int cells, int order) {
  return integrate_cells(f, uniform_breaks(cells), order);
}

std::vector<double> merge_breaks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  const double eps = 1e-13;
  while (i < a.size() || j < b.size()) {
    double v;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      v = a[i++];
    } else {
      v = b[j++];
    }
    if (out.empty() || v - out.back() > eps) out.push_back(v);
  }
  return out;
}

std::vector<double> uniform_breaks(int m) {
  std::vector<double> v(m + 1);
  for (int i = 0; i <= m; ++i) v[i] = static_cast<double>(i) / m;
  return v;
}

}  // namespace addwn::quad
