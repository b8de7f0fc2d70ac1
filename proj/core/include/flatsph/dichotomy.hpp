#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flatsph/kernels.hpp"
#include "flatsph/spaces.hpp"

namespace flatsph::dichotomy {

enum class Classification { Convergent, LogDivergent, PolyDivergent, Ambiguous };
std::string to_string(Classification c);

using Integrand = std::function<double(std::span<const double>)>;

struct AnnulusEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  // std_error above 25% of the estimate: budget too small.
  bool flagged = false;
};

inline constexpr int kDefaultStrata = 64;

// Stratified Monte Carlo over {lambda in chamber of rank p : r_lo <= |lambda| < r_hi}.
// p = 1: uniform strata in lambda.  p = 2: polar angle strata refined
// geometrically toward both walls.  p = 3: an 8 x 8 grid of angular strata.
AnnulusEstimate integrate_annulus(const Integrand& f, int p, double r_lo, double r_hi, std::uint64_t samples,
                                  std::uint64_t seed, int strata = kDefaultStrata);
AnnulusEstimate integrate_annulus(const kernels::IntegrandSpec& spec, double r_lo, double r_hi,
                                  std::uint64_t samples, std::uint64_t seed);

// Deterministic oracle: Gauss-Legendre panels (16 nodes) with panel length at
// most pi / (4 k max x).  p = 1 on [r_lo, r_hi]; p = 2 in polar coordinates.
double panel_quadrature(const kernels::IntegrandSpec& spec, double r_lo, double r_hi);

// n-point Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n);

struct ScanOptions {
  double r0 = 16.0;
  int levels = 9;
  std::uint64_t samples = 200000;
  std::uint64_t seed = 20240611;
};

struct Partial {
  double radius = 0.0;
  double integral = 0.0;
  double std_error = 0.0;
  bool flagged = false;
  // Integral over the shell since the previous radius.  NaN means "take the
  // difference of cumulative integrals", which loses the shell once it drops
  // below rounding of the running total.
  double shell = std::numeric_limits<double>::quiet_NaN();
  double shell_std_error = std::numeric_limits<double>::quiet_NaN();
};

// Upper-bound decay exponent of the integrand in a region and the dimension
// of the polar measure it is tested against.  For the type A region W21 the
// bound is a product lambda_2^{-secondary} lambda_1^{-exponent}, one
// dimension each.
struct ExponentPrediction {
  double exponent = 0.0;
  std::optional<double> secondary;
  int measure_dim = 1;
  bool implies_convergence() const;
};

struct GrowthReport {
  std::vector<Partial> partials;  // I_0 over the ball of radius r0, then nested balls
  std::vector<double> increments;
  std::vector<double> increment_stderr;
  std::vector<double> ratios;  // over the last four increments
  Classification classification = Classification::Ambiguous;
  // Convergent: extrapolated limit.  LogDivergent: slope per ln R.
  // PolyDivergent: growth exponent s.  Ambiguous: NaN.
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::map<std::string, ExponentPrediction> predicted;
  bool any_flagged = false;
};

// Classification of nested partial integrals by the increment-ratio rule.
GrowthReport classify_partials(std::vector<Partial> partials);

GrowthReport growth_scan(const kernels::IntegrandSpec& spec, const ScanOptions& options = {});

// Exponent predictions by region.  `cls` Regular with p = 1 means a rank-one space.
ExponentPrediction predicted_exponent(spaces::Region region, spaces::PointClass cls, int k, int r, int p = 2);
std::map<std::string, ExponentPrediction> predicted_exponents(const kernels::IntegrandSpec& spec);

struct RankOneLowerBound {
  std::vector<double> radii;  // right end of the n-th interval
  std::vector<double> partial_sums;
};

// Partial sums over n = 1..N of the bound on [n pi / t, (2n+1) pi / (2t)].
RankOneLowerBound lower_bound_rank1(double t, int n);

struct Rectangle {
  double l1_lo = 0.0, l1_hi = 0.0, l2_lo = 0.0, l2_hi = 0.0;
  double bound = 0.0;
};

struct RectangleLowerBound {
  std::vector<Rectangle> rectangles;
  std::vector<double> partial_sums;
};

RectangleLowerBound lower_bound_typeD_rectangles(double x, double eta, int n);

struct QuadratureEstimate {
  double value = 0.0;
  double error = 0.0;
};

// Tensor Gauss-Legendre integral of the (q = 2, k = 2) type D integrand over
// each rectangle; error estimated against a lower-order rule.
std::vector<QuadratureEstimate> rectangle_quadrature(const RectangleLowerBound& bound, double x);

struct Verdict {
  std::string space;
  spaces::PointClass cls = spaces::PointClass::Regular;
  int k = 0;
  Classification classification = Classification::Ambiguous;
  bool in_l1 = false;
  bool in_l2 = false;
  bool dichotomy_holds_at_k = true;
};

struct MinKResult {
  std::optional<int> min_k;
  int l1_power = 2;
  std::vector<Verdict> verdicts;
  std::vector<GrowthReport> reports;
  bool ambiguous = false;
  bool dichotomy_holds = true;
};

std::string space_id(const spaces::RootDatum& datum);

// Scans k = 1..k_max and stops at the first Convergent power (the kernel is
// bounded by 1, so larger powers stay convergent).
MinKResult min_k_scan(const kernels::IntegrandSpec& spec_template, int k_max, const ScanOptions& options = {});

}  // namespace flatsph::dichotomy
