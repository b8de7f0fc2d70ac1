#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace flatsph::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Two-sided 97.5% Student t quantile.
double t_quantile_975(int dof);

// Kolmogorov-Smirnov statistics.
double ks_uniform(std::vector<double> samples);  // against U(0, 1)
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic critical value at level alpha for sample sizes n (and m).
double ks_critical(double alpha, double n, double m = 0.0);

// Running mean and variance (Welford).
class RunningStats {
 public:
  void add(double x);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace flatsph::stats
