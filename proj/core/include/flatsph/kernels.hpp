#pragma once

#include <span>
#include <stdexcept>

#include "flatsph/divided_difference.hpp"
#include "flatsph/spaces.hpp"
#include "flatsph/specfun.hpp"

namespace flatsph::kernels {

class KernelDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KernelValue {
  double value = 0.0;
  // Estimated relative error of `value`.
  double conditioning = 0.0;
  // True when some nodes were close enough to use the confluent expansion.
  bool confluent = false;
};

// Normalized rank-one spherical function 2^nu Gamma(nu+1) f_nu(t lambda); 1 at lambda = 0.
double kernel_rank1(specfun::BesselOrder nu, double t, double lambda);

// det[g_r(a_i b_j)] / (V(a) V(b)) with a = x^2, b = lambda^2, V(y) = prod_{i<j} (y_i - y_j).
// x and lambda lie in the closed chamber and have equal length p <= 3.
// Confluent nodes are handled as Hermite limits, so walls are allowed.
KernelValue kernel_determinant(int r, std::span<const double> x, std::span<const double> lambda);

// kernel_determinant(0 lambda) for any x: prod_j g_r^{(j-1)}(0) / (j-1)!, evaluated
// as a confluent limit.
double kernel_normalization(int r, int p);

// Spherical function psi_lambda(X) normalized to 1 at lambda = 0, any X.
KernelValue spherical_kernel(int r, std::span<const double> x, std::span<const double> lambda);

// Same as spherical_kernel, but X must be regular (p = 1, 2, 3).
KernelValue kernel_regular(int r, const spaces::OrbitPoint& x, std::span<const double> lambda);

// Type D point X = (x, x):
//   det[[l1 f_r'(x l1), l2 f_r'(x l2)], [f_r(x l1), f_r(x l2)]] / (l1^2 - l2^2).
// Stable as l1 -> l2.
KernelValue kernel_typeD(int r, double x, std::span<const double, 2> lambda);

// Type A point X = (x, 0): (f_r(x l1) - f_r(x l2)) / (l1^2 - l2^2), stable as l1 -> l2.
KernelValue kernel_typeA(int r, double x, std::span<const double, 2> lambda);

// |kernel|^{2k} times the Plancherel density, for the class of `point`.
// Constant factors depending only on X are dropped.
struct IntegrandSpec {
  spaces::RootDatum datum;
  spaces::OrbitPoint point;
  int k = 2;
};

double integrand_phi(const IntegrandSpec& spec, std::span<const double> lambda);

}  // namespace flatsph::kernels
