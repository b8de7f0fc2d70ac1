#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "flatsph/dichotomy.hpp"

using namespace flatsph;
using namespace flatsph::dichotomy;

namespace {

kernels::IntegrandSpec make_spec(spaces::RootDatum d, std::vector<double> x, int k) {
  kernels::IntegrandSpec s;
  s.datum = std::move(d);
  s.point = spaces::classify_point(x);
  s.k = k;
  return s;
}

std::vector<Partial> cumulative(const std::vector<double>& integrals) {
  std::vector<Partial> out;
  for (size_t i = 0; i < integrals.size(); ++i) out.push_back({16.0 * std::ldexp(1.0, i), integrals[i], 1e-9, false});
  return out;
}

}  // namespace

TEST(Annulus, ReciprocalIntegrand) {
  const Integrand f = [](std::span<const double> l) { return 1.0 / l[0]; };
  for (double R : {10.0, 1000.0}) {
    const auto est = integrate_annulus(f, 1, 1.0, R, 100000, 7);
    EXPECT_NEAR(est.estimate, std::log(R), 3.0 * est.std_error + 1e-12);
    EXPECT_FALSE(est.flagged);
  }
}

TEST(Annulus, InverseSquareIntegrand) {
  const Integrand f = [](std::span<const double> l) { return 1.0 / (l[0] * l[0]); };
  for (double R : {4.0, 64.0, 4096.0}) {
    const auto est = integrate_annulus(f, 1, 1.0, R, 100000, 8);
    EXPECT_NEAR(est.estimate, 1.0 - 1.0 / R, 3.0 * est.std_error + 1e-12);
  }
}

TEST(Annulus, PolarMeasureInTwoAndThreeDimensions) {
  // Constant integrand: chamber area of the annulus.
  const Integrand one = [](std::span<const double>) { return 1.0; };
  const auto a2 = integrate_annulus(one, 2, 1.0, 3.0, 50000, 9);
  EXPECT_NEAR(a2.estimate, std::numbers::pi / 8.0 * (9.0 - 1.0), 1e-9);
  // Chamber lambda_1 > lambda_2 > lambda_3 > 0 is 1/48 of R^3.
  const auto a3 = integrate_annulus(one, 3, 1.0, 2.0, 50000, 10);
  EXPECT_NEAR(a3.estimate, 4.0 / 3.0 * std::numbers::pi * (8.0 - 1.0) / 48.0, 3.0 * a3.std_error + 1e-9);
}

TEST(Annulus, FlagsSmallBudgets) {
  // Nonzero on 0.5% of the range: a handful of hits out of 1000 draws.
  const Integrand sparse = [](std::span<const double> l) {
    const double f = l[0] * 997.0 - std::floor(l[0] * 997.0);
    return f < 0.005 ? 1e6 : 0.0;
  };
  EXPECT_TRUE(integrate_annulus(sparse, 1, 1.0, 100.0, 1000, 11).flagged);
  EXPECT_FALSE(integrate_annulus(sparse, 1, 1.0, 100.0, 2000000, 11).flagged);
}

TEST(Annulus, AgreesWithPanelQuadrature) {
  const auto spec = make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {1.0}, 2);
  const auto mc = integrate_annulus(spec, 1.0, 4096.0, 200000, 12);
  const double q = panel_quadrature(spec, 1.0, 4096.0);
  EXPECT_NEAR(mc.estimate, q, 3.0 * mc.std_error);
}

TEST(Annulus, AgreesWithPanelQuadratureInTwoDimensions) {
  const auto spec = make_spec(spaces::aiii_datum(2, 3), {2.0, 1.0}, 2);
  const auto mc = integrate_annulus(spec, 0.0, 12.0, 200000, 13);
  const double q = panel_quadrature(spec, 0.0, 12.0);
  EXPECT_NEAR(mc.estimate, q, 3.0 * mc.std_error);
}

TEST(Quadrature, GaussLegendre) {
  const auto rule = gauss_legendre(16);
  double s = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 30);
  EXPECT_NEAR(s, 2.0 / 31.0, 1e-14);
}

TEST(Classify, Geometric) {
  std::vector<double> I;
  double sum = 0.0;
  for (int m = 0; m < 10; ++m) I.push_back(sum += std::pow(0.25, m));
  const auto rep = classify_partials(cumulative(I));
  EXPECT_EQ(rep.classification, Classification::Convergent);
  EXPECT_NEAR(rep.value, 4.0 / 3.0, 1e-6);
}

TEST(Classify, Logarithmic) {
  std::vector<double> I;
  for (int m = 0; m < 10; ++m) I.push_back(1.0 + 0.5 * std::log(16.0 * std::ldexp(1.0, m)));
  const auto rep = classify_partials(cumulative(I));
  EXPECT_EQ(rep.classification, Classification::LogDivergent);
  EXPECT_NEAR(rep.value, 0.5, 1e-9);
  EXPECT_LE(rep.ci_low, 0.5);
  EXPECT_GE(rep.ci_high, 0.5);
}

TEST(Classify, Power) {
  std::vector<double> I;
  for (int m = 0; m < 10; ++m) I.push_back(std::pow(16.0 * std::ldexp(1.0, m), 1.5));
  const auto rep = classify_partials(cumulative(I));
  EXPECT_EQ(rep.classification, Classification::PolyDivergent);
  EXPECT_NEAR(rep.value, 1.5, 1e-9);
}

TEST(Classify, AmbiguousBetweenBands) {
  std::vector<double> I;
  double sum = 0.0;
  for (int m = 0; m < 10; ++m) I.push_back(sum += std::pow(0.85, m));
  EXPECT_EQ(classify_partials(cumulative(I)).classification, Classification::Ambiguous);
  EXPECT_THROW(classify_partials(cumulative({1, 2, 3})), std::invalid_argument);
}

TEST(Classify, ShellsOverrideCumulativeDifferences) {
  // Shells far below the rounding of the running total still classify.
  std::vector<Partial> p;
  for (int m = 0; m < 10; ++m) {
    Partial q{16.0 * std::ldexp(1.0, m), 1.0, 1e-3, false};
    if (m > 0) {
      q.shell = 1e-20 * std::pow(0.1, m);
      q.shell_std_error = 1e-3 * q.shell;
    }
    p.push_back(q);
  }
  EXPECT_EQ(classify_partials(p).classification, Classification::Convergent);
}

TEST(Growth, RankOneLogDivergence) {
  const auto rep = growth_scan(make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {1.0}, 2));
  EXPECT_EQ(rep.classification, Classification::LogDivergent);
  const double slope = 3.0 / (2.0 * std::numbers::pi * std::numbers::pi);
  EXPECT_NEAR(rep.value, slope, 0.05 * slope);
}

TEST(Growth, RankOneConvergesAtThree) {
  const auto rep = growth_scan(make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {1.0}, 3));
  EXPECT_EQ(rep.classification, Classification::Convergent);
}

TEST(Growth, PartialsNondecreasingAndDeterministic) {
  const auto spec = make_spec(spaces::aiii_datum(2, 4), {1.0, 0.0}, 2);
  ScanOptions o;
  o.samples = 20000;
  const auto a = growth_scan(spec, o);
  const auto b = growth_scan(spec, o);
  for (size_t i = 1; i < a.partials.size(); ++i) EXPECT_GE(a.partials[i].integral, a.partials[i - 1].integral);
  ASSERT_EQ(a.partials.size(), b.partials.size());
  for (size_t i = 0; i < a.partials.size(); ++i) {
    EXPECT_EQ(a.partials[i].integral, b.partials[i].integral);
    EXPECT_EQ(a.partials[i].std_error, b.partials[i].std_error);
  }
  o.seed += 1;
  EXPECT_NE(growth_scan(spec, o).partials.back().integral, a.partials.back().integral);
}

TEST(Growth, PredictionsImplyConvergence) {
  // Every region bound integrable against its measure means the scan converges.
  const std::vector<kernels::IntegrandSpec> specs = {
      make_spec(spaces::rank1_datum(spaces::CartanLabel::AII), {1.0}, 2),
      make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {1.0}, 3),
      make_spec(spaces::rank1_datum(spaces::CartanLabel::FII), {2.0}, 2),
      make_spec(spaces::aiii_datum(2, 4), {1.0, 0.0}, 3),
  };
  for (const auto& spec : specs) {
    const auto pred = predicted_exponents(spec);
    bool all = true;
    for (const auto& [name, e] : pred) all = all && e.implies_convergence();
    ASSERT_TRUE(all) << space_id(spec.datum);
    EXPECT_EQ(growth_scan(spec).classification, Classification::Convergent) << space_id(spec.datum);
  }
}

TEST(Growth, Errors) {
  ScanOptions o;
  o.levels = 5;
  EXPECT_THROW(growth_scan(make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {1.0}, 2), o), std::invalid_argument);
  EXPECT_THROW(min_k_scan(make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {1.0}, 2), 9), std::invalid_argument);
}

TEST(Predictions, Examples) {
  using spaces::PointClass;
  using spaces::Region;
  EXPECT_EQ(predicted_exponent(Region::W1, PointClass::Regular, 2, 1).exponent, 5.0);
  EXPECT_EQ(predicted_exponent(Region::W22, PointClass::TypeA, 2, 1).exponent, 1.0);
  EXPECT_EQ(predicted_exponent(Region::W1, PointClass::TypeD, 2, 1).exponent, 4.0);
  const auto w21 = predicted_exponent(Region::W21, PointClass::TypeA, 2, 1);
  ASSERT_TRUE(w21.secondary.has_value());
  EXPECT_EQ(*w21.secondary, 3.0);
  EXPECT_EQ(predicted_exponent(Region::W1, PointClass::Regular, 2, 1, 3).exponent, 15.0);
  EXPECT_EQ(predicted_exponent(Region::W2, PointClass::Regular, 2, 1, 3).exponent, 11.0);
  EXPECT_EQ(predicted_exponent(Region::W3, PointClass::Regular, 2, 1, 3).exponent, 11.0);
  EXPECT_THROW(predicted_exponent(Region::W3, PointClass::TypeD, 2, 1), std::invalid_argument);
}

TEST(LowerBound, RankOneHarmonicGrowth) {
  const auto lb = lower_bound_rank1(1.0, 100);
  for (size_t i = 1; i < lb.partial_sums.size(); ++i) EXPECT_GE(lb.partial_sums[i], lb.partial_sums[i - 1]);
  const double gamma = 0.5772156649015329;
  const double ratio = lb.partial_sums[99] / lb.partial_sums[9];
  const double oracle = (std::log(100.0) + gamma) / (std::log(10.0) + gamma);
  EXPECT_NEAR(ratio, oracle, 0.1 * oracle);
}

TEST(LowerBound, RankOneDominatedByTruncatedIntegrals) {
  for (double t : {0.7, 1.0, 1.3}) {
    const auto spec = make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {t}, 2);
    const auto lb = lower_bound_rank1(t, 60);
    double integral = 0.0, prev = 0.0;
    for (size_t i = 0; i < lb.radii.size(); ++i) {
      integral += panel_quadrature(spec, prev, lb.radii[i]);
      prev = lb.radii[i];
      EXPECT_LE(lb.partial_sums[i], integral) << "t " << t << " n " << i + 1;
    }
  }
}

TEST(LowerBound, RectanglesDisjointInsideChamber) {
  const auto lb = lower_bound_typeD_rectangles(1.0, std::numbers::pi / 8, 50);
  for (size_t i = 0; i < lb.rectangles.size(); ++i) {
    const auto& r = lb.rectangles[i];
    EXPECT_GT(r.l2_lo, 0.0);
    EXPECT_LT(r.l2_hi, r.l1_lo);
    EXPECT_GT(r.bound, 0.0);
    if (i > 0) EXPECT_GT(r.l1_lo, lb.rectangles[i - 1].l1_hi);
    if (i > 0) EXPECT_GT(r.l2_lo, lb.rectangles[i - 1].l2_hi);
  }
}

TEST(LowerBound, RectangleBoundTendsToConstant) {
  const auto lb = lower_bound_typeD_rectangles(1.0, std::numbers::pi / 8, 4000);
  const double a = lb.rectangles[1999].bound, b = lb.rectangles[3999].bound;
  EXPECT_GT(b, 0.0);
  EXPECT_NEAR(a / b, 1.0, 1e-3);
}

TEST(LowerBound, QuadratureExceedsRectangleBound) {
  const auto lb = lower_bound_typeD_rectangles(1.0, std::numbers::pi / 8, 50);
  const auto quad = rectangle_quadrature(lb, 1.0);
  double total = 0.0;
  for (const auto& q : quad) total += q.value;
  EXPECT_GE(total, 0.9 * lb.partial_sums.back());
  EXPECT_THROW(lower_bound_typeD_rectangles(1.0, 0.8, 5), std::invalid_argument);
}

TEST(MinK, RankOneAi) {
  const auto res = min_k_scan(make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {1.0}, 1), 6);
  ASSERT_TRUE(res.min_k.has_value());
  EXPECT_EQ(*res.min_k, 3);
  EXPECT_FALSE(res.dichotomy_holds);
  for (const auto& v : res.verdicts) EXPECT_EQ(v.dichotomy_holds_at_k, !(v.in_l1 && !v.in_l2));
}

TEST(MinK, RegularPointHolds) {
  const auto res = min_k_scan(make_spec(spaces::aiii_datum(2, 3), {2.0, 1.0}, 1), 4);
  ASSERT_TRUE(res.min_k.has_value());
  EXPECT_EQ(*res.min_k, 2);
  EXPECT_TRUE(res.dichotomy_holds);
}

TEST(MinK, TypeAFourFailsAtTwo) {
  const auto res = min_k_scan(make_spec(spaces::aiii_datum(2, 4), {1.0, 0.0}, 1), 6);
  ASSERT_TRUE(res.min_k.has_value());
  EXPECT_EQ(*res.min_k, 3);
  EXPECT_FALSE(res.dichotomy_holds);
  EXPECT_FALSE(res.verdicts[1].dichotomy_holds_at_k);
}
