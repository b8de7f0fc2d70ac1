#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace flatsph {

// Value with an absolute error estimate.
struct Estimate {
  double value = 0.0;
  double abs_error = 0.0;
  bool confluent = false;
};

inline constexpr int kMaxDividedDifferenceNodes = 4;
inline constexpr int kMaxTaylorTerms = 40;

// Confluence measure for a function of the form h(kappa * x): the spread of
// the nodes measured in local oscillation periods.  g_r(t) oscillates in
// sqrt(t), so its natural period in t near t0 is about 2 sqrt(t0).
inline double confluence_measure(double kappa, double spread, double xmax) {
  const double k = std::abs(kappa);
  return k * spread / std::max(1.0, 2.0 * std::sqrt(k * std::abs(xmax)));
}

// Below this measure the divided difference is evaluated by a Taylor series
// around the node midpoint instead of the difference recursion.
inline constexpr double kConfluenceThreshold = 0.5;

// f[x_0, ..., x_{m-1}] for m <= 4 nodes in any order (duplicates allowed).
// `deriv(n, x)` returns an Estimate of the n-th derivative of f at x.
template <class Deriv>
Estimate divided_difference(std::span<const double> nodes, double kappa, Deriv&& deriv) {
  const int m = static_cast<int>(nodes.size());
  if (m < 1 || m > kMaxDividedDifferenceNodes) throw std::invalid_argument("divided difference needs 1..4 nodes");
  std::array<double, kMaxDividedDifferenceNodes> x{};
  std::copy(nodes.begin(), nodes.end(), x.begin());
  std::sort(x.begin(), x.begin() + m);
  if (m == 1) return deriv(0, x[0]);

  const double lo = x[0];
  const double hi = x[m - 1];
  const double spread = hi - lo;
  const double xmax = std::max(std::abs(lo), std::abs(hi));
  constexpr double eps = std::numeric_limits<double>::epsilon();

  if (confluence_measure(kappa, spread, xmax) <= kConfluenceThreshold) {
    // sum_j f^{(m-1+j)}(c) / (m-1+j)! * h_j(x - c), h_j complete homogeneous.
    const double c = 0.5 * (lo + hi);
    std::array<double, kMaxTaylorTerms + 1> h{};
    h[0] = 1.0;
    bool all_zero = true;
    for (int i = 0; i < m; ++i) {
      const double y = x[i] - c;
      if (y != 0.0) all_zero = false;
      for (int j = 1; j <= kMaxTaylorTerms; ++j) h[j] += y * h[j - 1];
    }
    Estimate out{0.0, 0.0, true};
    double factorial = 1.0;
    for (int n = 2; n < m; ++n) factorial *= n;
    double abs_sum = 0.0;
    int small_run = 0;
    double last = 0.0;
    for (int j = 0; j <= kMaxTaylorTerms; ++j) {
      const int n = m - 1 + j;
      if (j > 0) factorial *= n;
      if (j > 0 && h[j] == 0.0) {
        if (all_zero) break;
        continue;
      }
      const Estimate d = deriv(n, c);
      const double term = d.value / factorial * h[j];
      out.value += term;
      out.abs_error += std::abs(d.abs_error / factorial * h[j]);
      abs_sum += std::abs(term);
      last = std::abs(term);
      if (all_zero) break;
      if (j > 0 && last <= 1e-17 * std::abs(out.value)) {
        if (++small_run >= 2) break;
      } else {
        small_run = 0;
      }
    }
    out.abs_error += eps * abs_sum + (small_run >= 2 || all_zero ? 0.0 : last);
    return out;
  }

  const Estimate upper = divided_difference(std::span<const double>(x.data() + 1, m - 1), kappa, deriv);
  const Estimate lower = divided_difference(std::span<const double>(x.data(), m - 1), kappa, deriv);
  Estimate out;
  out.value = (upper.value - lower.value) / spread;
  out.abs_error =
      (upper.abs_error + lower.abs_error + eps * (std::abs(upper.value) + std::abs(lower.value))) / spread;
  out.confluent = upper.confluent || lower.confluent;
  return out;
}

}  // namespace flatsph
