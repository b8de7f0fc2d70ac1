#include "flatsph/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace flatsph::specfun {

namespace {

constexpr double kSeriesLimit = 12.0;
constexpr double kHankelLimit = 30.0;
constexpr double kForwardFraction = 0.8;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// sum_l (-q)^l / (l! Gamma(nu + l + 1)), q = s^2 / 4.  Negative q is allowed.
double reduced_series(double nu, double q) {
  double term = 1.0 / std::tgamma(nu + 1.0);
  CompensatedSum sum;
  sum.add(term);
  const double aq = std::abs(q);
  for (int l = 1; l < 500; ++l) {
    term *= -q / (l * (nu + l));
    sum.add(term);
    if (l * (nu + l) > aq && std::abs(term) <= 1e-18 * std::abs(sum.value())) break;
    if (term == 0.0) break;
  }
  return sum.value();
}

void check_argument(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw DomainError("Bessel argument must be finite and non-negative, got " + std::to_string(s));
  }
}

// Hankel pair at fractional order, then forward recurrence.  Requires s >= kHankelLimit.
void ladder_forward(double nu0, double s, std::span<double> out) {
  const double n0 = std::floor(nu0);
  const double mu = nu0 - n0;
  const int top = static_cast<int>(n0) + static_cast<int>(out.size()) - 1;
  double jm = detail::bessel_j_hankel(mu, s);
  double j = detail::bessel_j_hankel(mu + 1.0, s);
  int k = 0;
  auto store = [&](int idx, double v) {
    const int pos = idx - static_cast<int>(n0);
    if (pos >= 0 && pos < static_cast<int>(out.size())) out[pos] = v;
  };
  store(0, jm);
  store(1, j);
  for (k = 1; k < top; ++k) {
    const double jp = (2.0 * (mu + k) / s) * j - jm;
    jm = j;
    j = jp;
    store(k + 1, j);
  }
}

// Miller backward recurrence on orders mu + k, normalized by
// (s/2)^mu = Gamma(mu+1) J_mu + sum_{m>=1} (mu + 2m) Gamma(mu+m)/m! J_{mu+2m}.
void ladder_miller(double nu0, double s, std::span<double> out) {
  const double n0d = std::floor(nu0);
  const double mu = nu0 - n0d;
  const int n0 = static_cast<int>(n0d);
  const int count = static_cast<int>(out.size());
  const int needed = n0 + count - 1;
  const double reach = std::max(static_cast<double>(needed), s);
  int start = static_cast<int>(std::ceil(reach)) + 20 + static_cast<int>(std::ceil(std::sqrt(40.0 * reach)));
  if (start % 2 != 0) ++start;

  std::vector<double> coef(static_cast<size_t>(start / 2 + 1));
  if (mu == 0.0) {
    coef[0] = 1.0;
    for (size_t m = 1; m < coef.size(); ++m) coef[m] = 2.0;
  } else {
    coef[0] = std::tgamma(mu + 1.0);
    double w = std::tgamma(mu + 1.0);  // Gamma(mu + m) / m! at m = 1
    for (size_t m = 1; m < coef.size(); ++m) {
      coef[m] = (mu + 2.0 * m) * w;
      w *= (mu + m) / (m + 1.0);
    }
  }

  std::fill(out.begin(), out.end(), 0.0);
  double jp = 0.0;
  double j = 1e-300;
  double norm_sum = 0.0;
  for (int k = start;; --k) {
    if (k >= n0 && k <= needed) out[k - n0] = j;
    if (k % 2 == 0) norm_sum += coef[k / 2] * j;
    if (k == 0) break;
    const double jm = (2.0 * (mu + k) / s) * j - jp;
    jp = j;
    j = jm;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp *= 1e-250;
      norm_sum *= 1e-250;
      for (double& v : out) v *= 1e-250;
    }
  }
  const double scale = std::pow(0.5 * s, mu) / norm_sum;
  for (double& v : out) v *= scale;
}

}  // namespace

BesselOrder::BesselOrder(double nu) : nu_(nu) {
  if (!(nu >= 0.0) || nu > kMaxOrder) {
    throw DomainError("Bessel order must lie in [0, 50], got " + std::to_string(nu));
  }
}

namespace detail {

double bessel_j_series(double nu, double s) {
  if (s == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return std::pow(0.5 * s, nu) * reduced_series(nu, 0.25 * s * s);
}

double bessel_j_hankel(double nu, double s) {
  const double mu2 = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu2 - odd * odd) / (8.0 * k * s);
    if (a == 0.0) break;
    // Terms grow until (2k - 1)^2 passes 4 nu^2; past that, growth means divergence.
    if (odd * odd > mu2 && std::abs(a) > prev) break;
    prev = std::abs(a);
    switch (k % 4) {
      case 0: p += a; break;
      case 1: q += a; break;
      case 2: p -= a; break;
      default: q -= a; break;
    }
    if (std::abs(a) < 1e-17) break;
  }
  // chi = s - (nu/2 + 1/4) pi, expanded so that the large s is never shifted.
  const double phi = std::fmod(0.5 * nu + 0.25, 2.0) * std::numbers::pi;
  const double cs = std::cos(s);
  const double sn = std::sin(s);
  const double cchi = cs * std::cos(phi) + sn * std::sin(phi);
  const double schi = sn * std::cos(phi) - cs * std::sin(phi);
  return std::sqrt(2.0 / (std::numbers::pi * s)) * (p * cchi - q * schi);
}

double bessel_j_miller(double nu, double s) {
  double v = 0.0;
  ladder_miller(nu, s, std::span<double>(&v, 1));
  return v;
}

}  // namespace detail

void bessel_j_ladder(double nu0, double s, std::span<double> out) {
  check_argument(s);
  if (!(nu0 >= 0.0)) throw DomainError("ladder base order must be non-negative");
  if (out.empty()) return;
  if (s == 0.0) {
    for (size_t k = 0; k < out.size(); ++k) out[k] = (nu0 + k == 0.0) ? 1.0 : 0.0;
    return;
  }
  const double top = nu0 + static_cast<double>(out.size() - 1);
  if (s < kSeriesLimit) {
    for (size_t k = 0; k < out.size(); ++k) out[k] = detail::bessel_j_series(nu0 + k, s);
  } else if (s >= kHankelLimit && top <= kForwardFraction * s) {
    ladder_forward(nu0, s, out);
  } else {
    ladder_miller(nu0, s, out);
  }
}

double bessel_j(BesselOrder order, double s) {
  check_argument(s);
  double v = 0.0;
  bessel_j_ladder(order.value(), s, std::span<double>(&v, 1));
  return v;
}

double bessel_j_int(int n, double s) {
  const int m = std::abs(n);
  const double v = bessel_j(BesselOrder(m), s);
  return (n < 0 && (m % 2 == 1)) ? -v : v;
}

double f_nu(double nu, double s) {
  check_argument(s);
  if (s < kSeriesLimit) return std::pow(0.5, nu) * reduced_series(nu, 0.25 * s * s);
  double v = 0.0;
  bessel_j_ladder(nu, s, std::span<double>(&v, 1));
  return v * std::pow(s, -nu);
}

double f_r(int r, double s) {
  if (r < 0) throw DomainError("f_r requires r >= 0");
  return f_nu(r, s);
}

double f_r_prime(int r, double s) { return -s * f_r(r + 1, s); }

double f_r_second(int r, double s) { return -f_r(r + 1, s) + s * s * f_r(r + 2, s); }

void g_ladder(int r, double t, std::span<double> out) {
  if (r < 0) throw DomainError("g_r requires r >= 0");
  if (!std::isfinite(t)) throw DomainError("g_r argument must be finite");
  if (t < kSeriesLimit * kSeriesLimit) {
    // Two series values at the top, then g_{n-1} = 2n g_n - t g_{n+1} downward,
    // which is stable because g_n decreases with n.
    auto series = [&](size_t k) {
      const double nu = r + static_cast<double>(k);
      return std::pow(0.5, nu) * reduced_series(nu, 0.25 * t);
    };
    const size_t n = out.size();
    if (n <= 2) {
      for (size_t k = 0; k < n; ++k) out[k] = series(k);
      return;
    }
    out[n - 1] = series(n - 1);
    out[n - 2] = series(n - 2);
    for (size_t k = n - 2; k-- > 0;) {
      out[k] = 2.0 * (r + static_cast<double>(k) + 1.0) * out[k + 1] - t * out[k + 2];
    }
    return;
  }
  const double s = std::sqrt(t);
  bessel_j_ladder(r, s, out);
  const double inv = 1.0 / s;
  double scale = std::pow(s, -static_cast<double>(r));
  for (double& v : out) {
    v *= scale;
    scale *= inv;
  }
}

double g_r(int r, double t) {
  double v = 0.0;
  g_ladder(r, t, std::span<double>(&v, 1));
  return v;
}

double g_r_deriv(int r, double t, int order) {
  if (order < 0) throw DomainError("derivative order must be non-negative");
  return std::pow(-0.5, order) * g_r(r + order, t);
}

EnvelopeBound envelope_check(EnvelopeQuantity quantity, int r, std::span<const double> s_grid) {
  if (s_grid.size() < 4) throw DomainError("envelope grid needs at least 4 points");
  std::vector<double> grid(s_grid.begin(), s_grid.end());
  std::sort(grid.begin(), grid.end());
  if (grid.front() <= 0.0) throw DomainError("envelope grid must be positive");
  const double exponent = r + 0.5;
  std::vector<double> scaled(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    double v = 0.0;
    switch (quantity) {
      case EnvelopeQuantity::Value: v = f_r(r, s); break;
      case EnvelopeQuantity::FirstDerivative: v = f_r_prime(r, s); break;
      case EnvelopeQuantity::SecondDerivative: v = f_r_second(r, s); break;
    }
    scaled[i] = std::abs(v) * std::pow(s, exponent);
    if (!std::isfinite(scaled[i])) throw EnvelopeViolation("non-finite value at s = " + std::to_string(s));
  }
  const size_t half = grid.size() / 2;
  const double head = *std::max_element(scaled.begin(), scaled.begin() + half);
  const double tail = *std::max_element(scaled.begin() + half, scaled.end());
  if (tail > 1.05 * head) {
    throw EnvelopeViolation("decay slower than s^-(r+1/2): head constant " + std::to_string(head) +
                            ", tail constant " + std::to_string(tail));
  }
  return {std::max(head, tail), exponent, grid.front()};
}

}  // namespace flatsph::specfun
