#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace flatsph::specfun {

// Largest order accepted by the public Bessel entry points.
inline constexpr double kMaxOrder = 50.0;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Real Bessel order in [0, kMaxOrder].
class BesselOrder {
 public:
  explicit BesselOrder(double nu);
  double value() const noexcept { return nu_; }

 private:
  double nu_;
};

// J_nu(s) for s >= 0.
double bessel_j(BesselOrder order, double s);

// J_n(s) for integer n of either sign, using J_{-m} = (-1)^m J_m.
double bessel_j_int(int n, double s);

// out[k] = J_{nu0 + k}(s).  Orders may exceed kMaxOrder (internal use).
void bessel_j_ladder(double nu0, double s, std::span<double> out);

// f_nu(s) = J_nu(s) / s^nu, analytic at s = 0 with f_nu(0) = 1 / (2^nu Gamma(nu + 1)).
double f_nu(double nu, double s);
double f_r(int r, double s);

// f_r'(s) = -s f_{r+1}(s)
double f_r_prime(int r, double s);

// f_r''(s) = -f_{r+1}(s) + s^2 f_{r+2}(s)
double f_r_second(int r, double s);

// g_r(t) = sum_l (-1)^l t^l / (2^{2l+r} l! (r+l)!), so g_r(s^2) = f_r(s).
double g_r(int r, double t);

// n-th derivative of g_r: (-1/2)^n g_{r+n}.
double g_r_deriv(int r, double t, int order);

// out[k] = g_{r+k}(t).
void g_ladder(int r, double t, std::span<double> out);

enum class EnvelopeQuantity { Value, FirstDerivative, SecondDerivative };

// |q(s)| <= constant * s^{-exponent} for s >= valid_from.
struct EnvelopeBound {
  double constant;
  double exponent;
  double valid_from;
};

class EnvelopeViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Smallest constant over the grid with exponent r + 1/2.  Throws
// EnvelopeViolation when the tail of the grid needs a visibly larger constant
// than its head, i.e. the decay rate does not hold.
EnvelopeBound envelope_check(EnvelopeQuantity quantity, int r, std::span<const double> s_grid);

namespace detail {
double bessel_j_series(double nu, double s);
double bessel_j_hankel(double nu, double s);
double bessel_j_miller(double nu, double s);
}  // namespace detail

}  // namespace flatsph::specfun
