#include "flatsph/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "flatsph/stats.hpp"

namespace flatsph::reproduce {

using dichotomy::Classification;
using dichotomy::ScanOptions;

namespace {

kernels::IntegrandSpec make_spec(spaces::RootDatum datum, std::vector<double> x, int k) {
  kernels::IntegrandSpec spec;
  spec.datum = std::move(datum);
  spec.point = spaces::classify_point(x);
  spec.k = k;
  return spec;
}

std::string describe(const dichotomy::GrowthReport& rep) {
  std::ostringstream os;
  os << dichotomy::to_string(rep.classification);
  if (rep.classification != Classification::Ambiguous) {
    os << " value " << rep.value << " [" << rep.ci_low << ", " << rep.ci_high << "]";
  }
  os << " ratios";
  for (double r : rep.ratios) os << " " << r;
  return os.str();
}

Check expect_class(const std::string& name, const kernels::IntegrandSpec& spec, const ScanOptions& options,
                   std::initializer_list<Classification> accepted) {
  const auto rep = dichotomy::growth_scan(spec, options);
  Check c;
  c.name = name;
  c.passed = std::find(accepted.begin(), accepted.end(), rep.classification) != accepted.end();
  c.ambiguous = rep.classification == Classification::Ambiguous;
  c.detail = describe(rep);
  return c;
}

}  // namespace

bool Row::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool Row::ambiguous() const {
  return std::any_of(checks.begin(), checks.end(), [](const Check& c) { return c.ambiguous; });
}

Row rank_one_row(const ScanOptions& options) {
  Row row;
  row.id = "rank-one";
  row.statement = "rank one: minimal power 2 when nu > 0, 3 for AI; dichotomy fails only for AI";
  using spaces::CartanLabel;
  const std::vector<std::pair<CartanLabel, std::optional<int>>> families = {
      {CartanLabel::AI, std::nullopt},  {CartanLabel::AII, std::nullopt}, {CartanLabel::AIII, 2},
      {CartanLabel::AIII, 3},           {CartanLabel::AIII, 5},           {CartanLabel::BDI, 3},
      {CartanLabel::BDI, 4},            {CartanLabel::CII, 2},            {CartanLabel::FII, std::nullopt}};
  for (const auto& [label, q] : families) {
    const auto datum = spaces::rank1_datum(label, q);
    const auto res = dichotomy::min_k_scan(make_spec(datum, {1.0}, 1), 4, options);
    const bool ai = datum.bessel_order() == 0.0;
    const int expected = ai ? 3 : 2;
    Check c;
    c.name = dichotomy::space_id(datum);
    c.passed = res.min_k == expected && res.dichotomy_holds == !ai;
    c.ambiguous = res.ambiguous;
    std::ostringstream os;
    os << "min k " << (res.min_k ? std::to_string(*res.min_k) : "none") << " (expected " << expected
       << "), dichotomy " << (res.dichotomy_holds ? "holds" : "fails");
    c.detail = os.str();
    row.checks.push_back(c);
  }
  return row;
}

Row regular_p2_row(const ScanOptions& options) {
  Row row;
  row.id = "regular-p2";
  row.statement = "p = 2, regular X = (2, 1), k = 2 is square integrable for q = 2, 3, 4";
  for (int q : {2, 3, 4}) {
    row.checks.push_back(expect_class("q=" + std::to_string(q), make_spec(spaces::aiii_datum(2, q), {2.0, 1.0}, 2),
                                      options, {Classification::Convergent}));
  }
  return row;
}

Row type_d_row(const ScanOptions& options) {
  Row row;
  row.id = "typeD-p2";
  row.statement = "p = 2, type D, k = 2: divergent for q = 2 with linear rectangle bound, convergent for q = 3";
  row.checks.push_back(expect_class("q=2 k=2 divergent", make_spec(spaces::aiii_datum(2, 2), {1.0, 1.0}, 2), options,
                                    {Classification::LogDivergent, Classification::PolyDivergent}));

  const auto bound = dichotomy::lower_bound_typeD_rectangles(1.0, std::numbers::pi / 8.0, 50);
  std::vector<double> n, s;
  for (int i = 10; i <= 50; ++i) {
    n.push_back(i);
    s.push_back(bound.partial_sums[i - 1]);
  }
  const auto fit = stats::linear_fit(n, s);
  Check lin;
  lin.name = "rectangle sums linear";
  lin.passed = fit.r_squared >= 0.99 && fit.slope > 0.0;
  lin.detail = "R^2 " + std::to_string(fit.r_squared) + ", slope " + std::to_string(fit.slope);
  row.checks.push_back(lin);

  const auto quad = dichotomy::rectangle_quadrature(bound, 1.0);
  double q_sum = 0.0, q_err = 0.0;
  for (const auto& e : quad) {
    q_sum += e.value;
    q_err += e.error;
  }
  Check dom;
  dom.name = "quadrature dominates bound";
  dom.passed = q_sum + 3.0 * q_err >= bound.partial_sums.back();
  dom.detail = "quadrature " + std::to_string(q_sum) + " +- " + std::to_string(q_err) + ", bound " +
               std::to_string(bound.partial_sums.back());
  row.checks.push_back(dom);

  row.checks.push_back(expect_class("q=3 k=2 convergent", make_spec(spaces::aiii_datum(2, 3), {1.0, 1.0}, 2),
                                    options, {Classification::Convergent}));
  return row;
}

Row type_a_row(const ScanOptions& options) {
  Row row;
  row.id = "typeA-p2";
  row.statement = "p = 2, type A: log growth at q = 3, power growth at q = 4, minimal power max(3, ceil(3/4 + q/2))";
  row.checks.push_back(expect_class("q=3 k=2 log", make_spec(spaces::aiii_datum(2, 3), {1.0, 0.0}, 2), options,
                                    {Classification::LogDivergent}));
  {
    const auto rep = dichotomy::growth_scan(make_spec(spaces::aiii_datum(2, 4), {1.0, 0.0}, 2), options);
    Check c;
    c.name = "q=4 k=2 exponent 1 +- 0.1";
    c.passed = rep.classification == Classification::PolyDivergent && std::abs(rep.value - 1.0) <= 0.1;
    c.ambiguous = rep.classification == Classification::Ambiguous;
    c.detail = describe(rep);
    row.checks.push_back(c);
  }
  row.checks.push_back(expect_class("q=4 k=3 convergent", make_spec(spaces::aiii_datum(2, 4), {1.0, 0.0}, 3), options,
                                    {Classification::Convergent}));
  for (int q : {3, 4, 5, 6}) {
    const auto res = dichotomy::min_k_scan(make_spec(spaces::aiii_datum(2, q), {1.0, 0.0}, 1), 6, options);
    const int expected = std::max(3, static_cast<int>(std::ceil(0.75 + 0.5 * q)));
    Check c;
    c.name = "min k q=" + std::to_string(q);
    c.passed = res.min_k == expected && !res.dichotomy_holds;
    c.ambiguous = res.ambiguous;
    c.detail = "min k " + (res.min_k ? std::to_string(*res.min_k) : std::string("none")) + " (expected " +
               std::to_string(expected) + "), dichotomy " + (res.dichotomy_holds ? "holds" : "fails");
    row.checks.push_back(c);
  }
  return row;
}

Row regular_p3_row(const ScanOptions& options) {
  Row row;
  row.id = "regular-p3";
  row.statement = "p = 3, regular X = (3, 2, 1), k = 2 is square integrable for q = 3, 4";
  for (int q : {3, 4}) {
    row.checks.push_back(expect_class("q=" + std::to_string(q),
                                      make_spec(spaces::aiii_datum(3, q), {3.0, 2.0, 1.0}, 2), options,
                                      {Classification::Convergent}));
  }
  return row;
}

std::vector<Row> reproduce_all(const ScanOptions& options) {
  return {rank_one_row(options), regular_p2_row(options), type_d_row(options), type_a_row(options),
          regular_p3_row(options)};
}

nlohmann::json to_json(const std::vector<Row>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : row.checks) {
      checks.push_back({{"name", c.name}, {"pass", c.passed}, {"ambiguous", c.ambiguous}, {"detail", c.detail}});
    }
    out.push_back({{"id", row.id},
                   {"statement", row.statement},
                   {"pass", row.passed()},
                   {"ambiguous", row.ambiguous()},
                   {"checks", checks}});
  }
  return out;
}

}  // namespace flatsph::reproduce
