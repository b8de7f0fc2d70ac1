#include "flatsph/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace flatsph::kernels {

namespace {

using specfun::g_ladder;

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Relative accuracy assumed for a single g_r evaluation.
constexpr double kLeafRelError = 1e-13;
constexpr int kMaxLadder = 2 * kMaxTaylorTerms + 8;

double falling(int m, int j) {
  if (j > m) return 0.0;
  double v = 1.0;
  for (int i = 0; i < j; ++i) v *= (m - i);
  return v;
}

double binomial(int n, int l) {
  double v = 1.0;
  for (int i = 1; i <= l; ++i) v = v * (n - l + i) / i;
  return v;
}

double int_pow(double base, int e) {
  double v = 1.0;
  for (int i = 0; i < e; ++i) v *= base;
  return v;
}

// d^n/dalpha^n d^m/dbeta^m g_r(alpha beta).
Estimate mixed_partial(int r, int n, int m, double alpha, double beta) {
  const int len = n + m + 1;
  if (len > kMaxLadder) throw KernelDomainError("derivative order too high for the confluent expansion");
  // Taylor expansions request growing orders at one point; keep the last ladder.
  struct LadderCache {
    int r = -1;
    double t = 0.0;
    int len = 0;
    std::array<double, kMaxLadder> values{};
  };
  thread_local LadderCache cache;
  const double t = alpha * beta;
  if (cache.r != r || cache.t != t || cache.len < len) {
    const int want = std::min(kMaxLadder, std::max(len, n + m + 12));
    g_ladder(r, t, std::span<double>(cache.values.data(), want));
    cache.r = r;
    cache.t = t;
    cache.len = want;
  }
  const auto& lad = cache.values;
  double sum = 0.0;
  double abs_sum = 0.0;
  for (int l = 0; l <= n; ++l) {
    const int da = n - l;
    if (da > m) continue;
    const int order = m + l;
    const double deriv = std::pow(-0.5, order) * lad[order];
    const double term = binomial(n, l) * falling(m, da) * int_pow(alpha, m - da) * int_pow(beta, l) * deriv;
    sum += term;
    abs_sum += std::abs(term);
  }
  return {sum, kLeafRelError * abs_sum, false};
}

// g_r(a_i b_j) at the node grid, reused across the divided-difference recursion.
struct NodeCache {
  int p = 0;
  std::array<double, 3> a{}, b{};
  std::array<std::array<double, 3>, 3> value{};

  const double* find(double alpha, double beta) const {
    for (int i = 0; i < p; ++i) {
      if (a[i] != alpha) continue;
      for (int j = 0; j < p; ++j) {
        if (b[j] == beta) return &value[i][j];
      }
    }
    return nullptr;
  }
};

// T_ij = G[a_0..a_i; b_0..b_j] for G(alpha, beta) = g_r(alpha beta).
Estimate tensor_entry(int r, std::span<const double> a, std::span<const double> b, const NodeCache& cache) {
  double bmax = 0.0;
  for (double v : b) bmax = std::max(bmax, v);
  return divided_difference(a, bmax, [&](int n, double alpha) {
    return divided_difference(b, alpha, [&](int m, double beta) -> Estimate {
      if (n == 0 && m == 0) {
        if (const double* v = cache.find(alpha, beta)) return {*v, kLeafRelError * std::abs(*v), false};
      }
      return mixed_partial(r, n, m, alpha, beta);
    });
  });
}

struct Matrix3 {
  std::array<std::array<double, 3>, 3> v{};
  std::array<std::array<double, 3>, 3> e{};
};

double det2(double a, double b, double c, double d) { return a * d - b * c; }

// Determinant with first-order error propagation.
Estimate determinant(const Matrix3& m, int p) {
  const auto& v = m.v;
  const auto& e = m.e;
  if (p == 1) return {v[0][0], e[0][0], false};
  if (p == 2) {
    const double value = det2(v[0][0], v[0][1], v[1][0], v[1][1]);
    const double err = std::abs(v[1][1]) * e[0][0] + std::abs(v[0][0]) * e[1][1] + std::abs(v[1][0]) * e[0][1] +
                       std::abs(v[0][1]) * e[1][0] +
                       kEps * (std::abs(v[0][0] * v[1][1]) + std::abs(v[0][1] * v[1][0]));
    return {value, err, false};
  }
  double value = 0.0;
  double err = 0.0;
  double abs_terms = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (i + 1) % 3, r1 = (i + 2) % 3, c0 = (j + 1) % 3, c1 = (j + 2) % 3;
      const double cof = det2(v[r0][c0], v[r0][c1], v[r1][c0], v[r1][c1]);
      if (i == 0) {
        value += v[0][j] * cof;
        abs_terms += std::abs(v[0][j] * cof);
      }
      err += std::abs(cof) * e[i][j];
    }
  }
  return {value, err + 4.0 * kEps * abs_terms, false};
}

void check_closed_chamber(std::span<const double> v, const char* what) {
  for (double c : v) {
    if (!std::isfinite(c) || c < 0.0) throw KernelDomainError(std::string(what) + " must be finite and non-negative");
  }
}

KernelValue to_kernel_value(const Estimate& est, bool confluent) {
  KernelValue out;
  out.value = est.value;
  out.conditioning = est.value != 0.0 ? est.abs_error / std::abs(est.value) : std::numeric_limits<double>::infinity();
  out.confluent = confluent;
  return out;
}

}  // namespace

double kernel_rank1(specfun::BesselOrder nu, double t, double lambda) {
  if (!(t >= 0.0) || !(lambda >= 0.0)) throw KernelDomainError("rank-one kernel needs t, lambda >= 0");
  const double n = nu.value();
  return std::pow(2.0, n) * std::tgamma(n + 1.0) * specfun::f_nu(n, t * lambda);
}

KernelValue kernel_determinant(int r, std::span<const double> x, std::span<const double> lambda) {
  const int p = static_cast<int>(x.size());
  if (p < 1 || p > 3 || lambda.size() != x.size()) throw KernelDomainError("kernel needs matching ranks 1..3");
  if (r < 0) throw KernelDomainError("kernel needs r >= 0");
  check_closed_chamber(x, "orbit point");
  check_closed_chamber(lambda, "spectral point");
  std::array<double, 3> a{}, b{};
  for (int i = 0; i < p; ++i) {
    a[i] = x[i] * x[i];
    b[i] = lambda[i] * lambda[i];
  }
  NodeCache cache;
  cache.p = p;
  cache.a = a;
  cache.b = b;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) cache.value[i][j] = specfun::g_r(r, a[i] * b[j]);
  }
  Matrix3 t;
  bool confluent = false;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const Estimate est = tensor_entry(r, std::span<const double>(a.data(), i + 1),
                                        std::span<const double>(b.data(), j + 1), cache);
      t.v[i][j] = est.value;
      t.e[i][j] = est.abs_error;
      confluent = confluent || est.confluent;
    }
  }
  return to_kernel_value(determinant(t, p), confluent);
}

double kernel_normalization(int r, int p) {
  static constexpr std::array<double, 3> kProbe{1.0, 0.5, 0.25};
  static constexpr std::array<double, 3> kZero{0.0, 0.0, 0.0};
  return kernel_determinant(r, std::span<const double>(kProbe.data(), p), std::span<const double>(kZero.data(), p)).value;
}

KernelValue spherical_kernel(int r, std::span<const double> x, std::span<const double> lambda) {
  KernelValue kv = kernel_determinant(r, x, lambda);
  kv.value /= kernel_normalization(r, static_cast<int>(x.size()));
  return kv;
}

KernelValue kernel_regular(int r, const spaces::OrbitPoint& x, std::span<const double> lambda) {
  if (x.cls != spaces::PointClass::Regular) throw KernelDomainError("kernel_regular needs a regular orbit point");
  return spherical_kernel(r, x.coords, lambda);
}

KernelValue kernel_typeD(int r, double x, std::span<const double, 2> lambda) {
  if (!(x > 0.0)) throw KernelDomainError("type D kernel needs x > 0");
  check_closed_chamber(lambda, "spectral point");
  const double a = x * x;
  const std::array<double, 2> b{lambda[0] * lambda[0], lambda[1] * lambda[1]};
  auto gder = [&](int order, double beta) { return std::pow(-0.5, order) * specfun::g_r(r + order, a * beta); };
  // u(beta) = beta g'(a beta), v(beta) = g(a beta)
  auto u_deriv = [&](int n, double beta) -> Estimate {
    double value = beta * int_pow(a, n) * gder(n + 1, beta);
    double mag = std::abs(value);
    if (n > 0) {
      const double extra = n * int_pow(a, n - 1) * gder(n, beta);
      value += extra;
      mag += std::abs(extra);
    }
    return {value, kLeafRelError * mag, false};
  };
  auto v_deriv = [&](int n, double beta) -> Estimate {
    const double value = int_pow(a, n) * gder(n, beta);
    return {value, kLeafRelError * std::abs(value), false};
  };
  const Estimate du = divided_difference(b, a, u_deriv);
  const Estimate dv = divided_difference(b, a, v_deriv);
  const Estimate u2 = u_deriv(0, b[1]);
  const Estimate v2 = v_deriv(0, b[1]);
  Estimate out;
  out.value = 2.0 * x * (du.value * v2.value - u2.value * dv.value);
  out.abs_error = 2.0 * x *
                  (std::abs(du.value) * v2.abs_error + du.abs_error * std::abs(v2.value) +
                   std::abs(u2.value) * dv.abs_error + u2.abs_error * std::abs(dv.value) +
                   kEps * (std::abs(du.value * v2.value) + std::abs(u2.value * dv.value)));
  return to_kernel_value(out, du.confluent || dv.confluent);
}

KernelValue kernel_typeA(int r, double x, std::span<const double, 2> lambda) {
  if (!(x > 0.0)) throw KernelDomainError("type A kernel needs x > 0");
  check_closed_chamber(lambda, "spectral point");
  const double a = x * x;
  const std::array<double, 2> b{lambda[0] * lambda[0], lambda[1] * lambda[1]};
  const Estimate dv = divided_difference(b, a, [&](int n, double beta) -> Estimate {
    const double value = int_pow(a, n) * std::pow(-0.5, n) * specfun::g_r(r + n, a * beta);
    return {value, kLeafRelError * std::abs(value), false};
  });
  return to_kernel_value(dv, dv.confluent);
}

double integrand_phi(const IntegrandSpec& spec, std::span<const double> lambda) {
  const auto& datum = spec.datum;
  const auto& point = spec.point;
  if (spec.k < 1) throw KernelDomainError("integrand power k must be >= 1");
  if (static_cast<int>(lambda.size()) != datum.rank || point.rank() != datum.rank) {
    throw KernelDomainError("integrand ranks do not match");
  }
  if (point.cls == spaces::PointClass::Zero) throw KernelDomainError("integrand undefined at the zero point");
  for (double v : lambda) {
    if (!(v > 0.0)) return 0.0;
  }
  // Symmetric in lambda: evaluate at the sorted point.
  double sorted_buf[3];
  if (!std::is_sorted(lambda.begin(), lambda.end(), std::greater<>())) {
    if (lambda.size() > 3) throw KernelDomainError("integrand supports rank <= 3");
    std::copy(lambda.begin(), lambda.end(), sorted_buf);
    std::sort(sorted_buf, sorted_buf + lambda.size(), std::greater<>());
    lambda = std::span<const double>(sorted_buf, lambda.size());
  }
  const double two_k = 2.0 * spec.k;
  double kernel = 0.0;
  if (datum.rank == 1) {
    kernel = specfun::f_nu(datum.bessel_order(), point.coords[0] * lambda[0]);
  } else {
    const int r = datum.r();
    switch (point.cls) {
      case spaces::PointClass::TypeD:
        kernel = kernel_typeD(r, point.coords[0], std::span<const double, 2>(lambda.data(), 2)).value;
        break;
      case spaces::PointClass::TypeA:
        kernel = kernel_typeA(r, point.coords[0], std::span<const double, 2>(lambda.data(), 2)).value;
        break;
      default:
        kernel = kernel_determinant(r, point.coords, lambda).value;
        break;
    }
  }
  if (kernel == 0.0) return 0.0;
  return std::exp(two_k * std::log(std::abs(kernel)) + spaces::log_plancherel_density(datum, lambda));
}

}  // namespace flatsph::kernels
