// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flatsph/dichotomy.hpp"
#include "flatsph/haarmc.hpp"
#include "flatsph/kernels.hpp"
#include "flatsph/specfun.hpp"
#include "flatsph/stats.hpp"
#include "oracles.hpp"

using namespace flatsph;
using dichotomy::Classification;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "] ";
    }
  }
};

kernels::IntegrandSpec make_spec(spaces::RootDatum d, std::vector<double> x, int k) {
  kernels::IntegrandSpec s;
  s.datum = std::move(d);
  s.point = spaces::classify_point(x);
  s.k = k;
  return s;
}

std::string describe(const dichotomy::GrowthReport& rep) {
  std::ostringstream os;
  os << dichotomy::to_string(rep.classification) << " " << rep.value << " [" << rep.ci_low << ", " << rep.ci_high
     << "]";
  return os.str();
}

bool ratios_at_most(const dichotomy::GrowthReport& rep, double bound) {
  return rep.ratios.size() == 3 && std::all_of(rep.ratios.begin(), rep.ratios.end(), [&](double r) { return r <= bound; });
}

// Fails only when mu^{*k} is integrable but not square integrable.
bool dichotomy_holds(const kernels::IntegrandSpec& spec, Classification cls) {
  const bool in_l1 = spec.k >= spaces::l1_power_lookup(spec.datum, spec.point);
  return !(in_l1 && cls != Classification::Convergent);
}

Outcome special_functions() {
  Outcome o;
  double worst = 0.0, worst_nu = 0.0, worst_s = 0.0;
  for (double nu : {0.0, 1.0, 1.5, 3.0, 4.0, 7.0}) {
    for (int i = 0; i <= 2000; ++i) {
      const double s = 0.05 * i;
      const double ref = oracle::bessel_j(nu, s);
      const double v = specfun::bessel_j(specfun::BesselOrder(nu), s);
      // Relative to the local amplitude: near a zero of J_nu a pointwise relative error is undefined.
      const double amp = s > 1.0 ? std::sqrt(2.0 / (std::numbers::pi * s)) : 0.0;
      const double err = std::abs(v - ref) / std::max(std::abs(ref), 1e-3 * amp);
      if (ref == 0.0 && v == 0.0) continue;
      if (err > worst) {
        worst = err;
        worst_nu = nu;
        worst_s = s;
      }
    }
  }
  o.detail << "max relative error " << worst << " (nu " << worst_nu << ", s " << worst_s << ")";
  o.require(worst <= 1e-8, "J_nu relative error <= 1e-8");

  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(10.0 * std::pow(1000.0, i / 400.0));
  int held = 0, total = 0;
  for (int r = 0; r <= 3; ++r) {
    for (auto q : {specfun::EnvelopeQuantity::Value, specfun::EnvelopeQuantity::FirstDerivative,
                   specfun::EnvelopeQuantity::SecondDerivative}) {
      ++total;
      try {
        specfun::envelope_check(q, r, grid);
        ++held;
      } catch (const specfun::EnvelopeViolation&) {
      }
    }
  }
  o.detail << "; envelopes " << held << "/" << total << " on [10, 1e4]";
  o.require(held == total, "all envelopes hold");
  return o;
}

Outcome rank_one_table() {
  Outcome o;
  using spaces::CartanLabel;
  const std::vector<std::pair<CartanLabel, std::optional<int>>> families = {
      {CartanLabel::AI, std::nullopt},  {CartanLabel::AII, std::nullopt}, {CartanLabel::AIII, 2},
      {CartanLabel::AIII, 3},           {CartanLabel::AIII, 5},           {CartanLabel::BDI, 3},
      {CartanLabel::BDI, 4},            {CartanLabel::CII, 2},            {CartanLabel::FII, std::nullopt}};
  for (const auto& [label, q] : families) {
    const auto datum = spaces::rank1_datum(label, q);
    const bool ai = datum.bessel_order() == 0.0;
    const auto res = dichotomy::min_k_scan(make_spec(datum, {1.0}, 1), 4);
    const int got = res.min_k.value_or(-1);
    o.detail << dichotomy::space_id(datum) << "=" << got << (res.dichotomy_holds ? "" : "*") << " ";
    o.require(got == (ai ? 3 : 2), dichotomy::space_id(datum) + " minimal power");
    o.require(res.dichotomy_holds == !ai, dichotomy::space_id(datum) + " dichotomy verdict");
  }
  o.detail << "(* = dichotomy fails)";
  return o;
}

Outcome bessel_zero_divergence() {
  Outcome o;
  for (double t : {0.7, 1.0, 1.3}) {
    const auto rep = dichotomy::growth_scan(make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {t}, 2));
    // sqrt(2 / (pi t lambda))^4 cos^4 averages to 3 / (2 pi^2 t^2 lambda) against lambda d lambda.
    const double expected = 3.0 / (2.0 * std::numbers::pi * std::numbers::pi * t * t);
    const double rel = std::abs(rep.value - expected) / expected;
    o.detail << "t=" << t << ": " << describe(rep) << " vs " << expected << "; ";
    o.require(rep.classification == Classification::LogDivergent, "LogDivergent at t=" + std::to_string(t));
    o.require(rel <= 0.05, "slope within 5% at t=" + std::to_string(t));

    const auto lb = dichotomy::lower_bound_rank1(t, 50);
    const auto spec = make_spec(spaces::rank1_datum(spaces::CartanLabel::AI), {t}, 2);
    bool dominated = true;
    for (size_t i = 0; i < lb.radii.size(); ++i) {
      dominated = dominated && lb.partial_sums[i] <= dichotomy::panel_quadrature(spec, 0.0, lb.radii[i]);
    }
    o.require(dominated, "lower bound dominated at t=" + std::to_string(t));
  }
  o.detail << "lower bounds dominated";
  return o;
}

Outcome regular_p2() {
  Outcome o;
  for (int q : {2, 3, 4}) {
    const auto rep = dichotomy::growth_scan(make_spec(spaces::aiii_datum(2, q), {2.0, 1.0}, 2));
    o.detail << "q=" << q << ": " << dichotomy::to_string(rep.classification) << " max ratio "
             << *std::max_element(rep.ratios.begin(), rep.ratios.end()) << "; ";
    o.require(rep.classification == Classification::Convergent && ratios_at_most(rep, 0.8),
              "convergent at q=" + std::to_string(q));
  }
  return o;
}

Outcome type_d() {
  Outcome o;
  const auto s2 = make_spec(spaces::aiii_datum(2, 2), {1.0, 1.0}, 2);
  const auto r2 = dichotomy::growth_scan(s2);
  o.detail << "q=2: " << describe(r2) << "; ";
  o.require(r2.classification == Classification::LogDivergent || r2.classification == Classification::PolyDivergent,
            "q=2 divergent");
  o.require(!dichotomy_holds(s2, r2.classification), "dichotomy fails at q=2");

  const auto bound = dichotomy::lower_bound_typeD_rectangles(1.0, std::numbers::pi / 8.0, 50);
  std::vector<double> n, s;
  for (int i = 10; i <= 50; ++i) {
    n.push_back(i);
    s.push_back(bound.partial_sums[i - 1]);
  }
  const auto fit = stats::linear_fit(n, s);
  o.detail << "rectangle R^2 " << fit.r_squared << "; ";
  o.require(fit.r_squared >= 0.99, "rectangle partial sums linear");

  const auto quad = dichotomy::rectangle_quadrature(bound, 1.0);
  double q_sum = 0.0, q_err = 0.0;
  for (const auto& e : quad) {
    q_sum += e.value;
    q_err += e.error;
  }
  o.detail << "quadrature " << q_sum << " +- " << q_err << " vs bound " << bound.partial_sums.back() << "; ";
  o.require(q_sum + 3.0 * q_err >= bound.partial_sums.back(), "quadrature above analytic bound");

  const auto s3 = make_spec(spaces::aiii_datum(2, 3), {1.0, 1.0}, 2);
  const auto r3 = dichotomy::growth_scan(s3);
  o.detail << "q=3: " << dichotomy::to_string(r3.classification);
  o.require(r3.classification == Classification::Convergent, "q=3 convergent");
  o.require(dichotomy_holds(s3, r3.classification), "dichotomy holds at q=3");
  return o;
}

Outcome type_a() {
  Outcome o;
  const auto r3 = dichotomy::growth_scan(make_spec(spaces::aiii_datum(2, 3), {1.0, 0.0}, 2));
  o.detail << "q=3 k=2: " << describe(r3) << "; ";
  o.require(r3.classification == Classification::LogDivergent, "q=3 k=2 LogDivergent");

  const auto r4 = dichotomy::growth_scan(make_spec(spaces::aiii_datum(2, 4), {1.0, 0.0}, 2));
  o.detail << "q=4 k=2: " << describe(r4) << "; ";
  o.require(r4.classification == Classification::PolyDivergent, "q=4 k=2 PolyDivergent");
  o.require(std::abs(r4.value - 1.0) <= 0.1, "q=4 k=2 exponent 1 +- 0.1");

  const auto r43 = dichotomy::growth_scan(make_spec(spaces::aiii_datum(2, 4), {1.0, 0.0}, 3));
  o.detail << "q=4 k=3: " << dichotomy::to_string(r43.classification) << "; min k";
  o.require(r43.classification == Classification::Convergent, "q=4 k=3 Convergent");

  for (int q : {3, 4, 5, 6}) {
    const int expected = std::max(3, static_cast<int>(std::ceil(0.75 + 0.5 * q)));
    const auto res = dichotomy::min_k_scan(make_spec(spaces::aiii_datum(2, q), {1.0, 0.0}, 1), 6);
    const int got = res.min_k.value_or(-1);
    o.detail << " q=" << q << ":" << got;
    o.require(got == expected, "min k at q=" + std::to_string(q));
    o.require(!res.dichotomy_holds, "dichotomy fails at q=" + std::to_string(q));
  }
  return o;
}

Outcome regular_p3() {
  Outcome o;
  for (int q : {3, 4}) {
    const auto rep = dichotomy::growth_scan(make_spec(spaces::aiii_datum(3, q), {3.0, 2.0, 1.0}, 2));
    o.detail << "q=" << q << ": " << dichotomy::to_string(rep.classification) << "; ";
    o.require(rep.classification == Classification::Convergent, "convergent at q=" + std::to_string(q));
  }
  return o;
}

// Regular kernel at (x, x - h), Richardson-extrapolated to h = 0.
double regular_limit(int r, double x, double l1, double l2) {
  auto at = [&](double h) {
    const double xs[2] = {x, x - h};
    const double ls[2] = {l1, l2};
    return kernels::kernel_determinant(r, xs, ls).value;
  };
  // The error is linear in h since only x_2 moves.
  return 2.0 * at(5e-5) - at(1e-4);
}

Outcome kernel_consistency() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  double worst1 = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int q = 2 + i % 4;
    const double x[1] = {1.3};
    const double l[1] = {u(rng)};
    const double ref = kernels::kernel_rank1(specfun::BesselOrder(q - 1), x[0], l[0]);
    worst1 = std::max(worst1, std::abs(kernels::spherical_kernel(q - 1, x, l).value - ref));
  }
  o.detail << "p=1 max diff " << worst1 << "; ";
  o.require(worst1 <= 1e-9, "p=1 reduction");

  // One fitted constant, then 30 points.
  std::uniform_real_distribution<double> v(0.2, 15.0);
  const double x = 1.2;
  const double c = kernels::kernel_typeD(0, x, std::array<double, 2>{3.1, 1.4}).value / regular_limit(0, x, 3.1, 1.4);
  double worst_d = 0.0, scale = 0.0;
  for (int i = 0; i < 30; ++i) {
    double a = v(rng), b = v(rng);
    if (a < b) std::swap(a, b);
    const double d = kernels::kernel_typeD(0, x, std::array<double, 2>{a, b}).value;
    worst_d = std::max(worst_d, std::abs(d - c * regular_limit(0, x, a, b)));
    scale = std::max(scale, std::abs(d));
  }
  o.detail << "typeD constant " << c << ", max diff " << worst_d / scale << " of scale; ";
  o.require(worst_d <= 1e-6 * scale, "confluent type D matches regular limit");

  std::uniform_real_distribution<double> base(0.5, 20.0), ex(-9.0, -6.0);
  double worst_w = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int r = i % 3;
    const double b = base(rng), gap = std::pow(10.0, ex(rng));
    const std::vector<double> xs = {2.0, 1.0}, ls = {b + gap, b};
    const double ref = oracle::naive_kernel(r, xs, ls);
    worst_w = std::max(worst_w, std::abs(kernels::kernel_determinant(r, xs, ls).value - ref) / std::abs(ref));
  }
  o.detail << "near-wall max relative " << worst_w;
  o.require(worst_w <= 1e-6, "near-wall stability");
  return o;
}

Outcome product_formula() {
  Outcome o;
  constexpr std::size_t kN = 100000;
  const auto ai = haarmc::ai_space();
  const auto ai_grid = haarmc::default_grid(ai);
  const auto ai_fit = haarmc::calibrate_scale(haarmc::sample_orbit_sum(ai, {{1.0}}, kN, 101), ai_grid);
  o.detail << "AI s " << ai_fit.s;
  for (int k = 1; k <= 3; ++k) {
    const std::vector<std::vector<double>> f(k, std::vector<double>{1.0});
    const auto rep = haarmc::validate_product_formula(haarmc::sample_orbit_sum(ai, f, kN, 110 + k), ai_grid, ai_fit.s);
    o.detail << ", k=" << k << " " << rep.rows.size() - rep.failures.size() << "/" << rep.rows.size();
    o.require(rep.passed, "AI k=" + std::to_string(k));
  }
  const auto aiii = haarmc::aiii_space(2, 3);
  const auto grid = haarmc::default_grid(aiii);
  const auto fit = haarmc::calibrate_scale(haarmc::sample_orbit_sum(aiii, {{2.0, 1.0}}, kN, 102), grid);
  const auto rep = haarmc::validate_product_formula(haarmc::sample_orbit_sum(aiii, {{2.0, 1.0}, {1.0, 0.0}}, kN, 120),
                                                    grid, fit.s);
  o.detail << "; AIII(2,3) s " << fit.s << ", mixed " << rep.rows.size() - rep.failures.size() << "/" << rep.rows.size();
  o.require(rep.passed, "AIII mixed factors");
  return o;
}

Outcome open_experiments() {
  Outcome o;
  dichotomy::ScanOptions extended;
  extended.levels = 11;
  const auto a = dichotomy::growth_scan(make_spec(spaces::aiii_datum(2, 2), {1.0, 0.0}, 2), extended);
  const auto d = dichotomy::growth_scan(make_spec(spaces::aiii_datum(2, 2), {1.0, 1.0}, 3));
  auto finite = [](const dichotomy::GrowthReport& r) {
    return !r.partials.empty() &&
           std::all_of(r.partials.begin(), r.partials.end(), [](const auto& p) { return std::isfinite(p.integral); });
  };
  o.detail << "typeA q=2 k=2: " << describe(a) << "; typeD q=2 k=3: " << describe(d) << " (no verdict asserted)";
  o.require(finite(a) && finite(d), "scans complete with finite partials");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 30, special_functions},   {2, 300, rank_one_table},   {3, 0, bessel_zero_divergence},
      {4, 600, regular_p2},         {5, 0, type_d},             {6, 0, type_a},
      {7, 900, regular_p3},         {8, 0, kernel_consistency}, {9, 300, product_formula},
      {10, 0, open_experiments},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime under " + std::to_string(static_cast<int>(c.budget_s)) + " s");
    failures += o.pass ? 0 : 1;
    std::printf("criterion %d: %s (%.1f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
