#pragma once

#include <functional>
#include <vector>

namespace addwn::quad {

// Gauss-Legendre rule on [-1,1]; nodes/weights computed once per order and
// cached.  Orders up to 64 are supported.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

// ∫_a^b f, single Gauss-Legendre panel.
double integrate_panel(const std::function<double(double)>& f, double a, double b, int order);

// Composite rule over consecutive cells [breaks[i], breaks[i+1]].
// breaks must be sorted; order is the per-cell Gauss order.
double integrate_cells(const std::function<double(double)>& f, const std::vector<double>& breaks,
                       int order);

// Uniform partition of [0,1] into `cells` cells, `order` Gauss nodes each.
double integrate01(const std::function<double(double)>& f, int cells, int order);

// Merge two sorted breakpoint lists, dropping near-duplicates.
std::vector<double> merge_breaks(const std::vector<double>& a, const std::vector<double>& b);

// 0,1/m,...,1 as a breakpoint list.
std::vector<double> uniform_breaks(int m);

}  // namespace addwn::quad
