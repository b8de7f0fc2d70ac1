#include "flatsph/dichotomy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "flatsph/stats.hpp"

namespace flatsph::dichotomy {

namespace {

using spaces::PointClass;
using spaces::Region;

constexpr double kPi = std::numbers::pi;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double uniform01(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

// Edges of n cells on (0, length), refined geometrically toward both ends;
// the outermost cells have width smallest * length / 2.
std::vector<double> two_sided_edges(double length, int n, double smallest) {
  const int half = n / 2;
  std::vector<double> d(half);
  const double ratio = half > 1 ? std::pow(smallest, 1.0 / (half - 1)) : 1.0;
  for (int k = 0; k < half; ++k) d[k] = 0.5 * length * std::pow(ratio, k);
  std::vector<double> edges;
  edges.reserve(n + 1);
  edges.push_back(0.0);
  for (int k = half - 1; k >= 0; --k) edges.push_back(d[k]);
  for (int k = 1; k < half; ++k) edges.push_back(length - d[k]);
  edges.push_back(length);
  return edges;
}

std::uint64_t spec_hash(const kernels::IntegrandSpec& spec) {
  std::string key = space_id(spec.datum) + "|k=" + std::to_string(spec.k);
  for (double v : spec.point.coords) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "|%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(v)));
    key += buf;
  }
  return stats::fnv1a64(key);
}

double max_coord(const kernels::IntegrandSpec& spec) {
  double m = 0.0;
  for (double v : spec.point.coords) m = std::max(m, v);
  return m;
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Convergent: return "Convergent";
    case Classification::LogDivergent: return "LogDivergent";
    case Classification::PolyDivergent: return "PolyDivergent";
    case Classification::Ambiguous: return "Ambiguous";
  }
  return "?";
}

std::string space_id(const spaces::RootDatum& datum) {
  std::string id = datum.rank == 1 ? "rank1:" + spaces::to_string(datum.label) : "aiii";
  if (datum.rank > 1) id += ":p=" + std::to_string(datum.rank);
  if (datum.q) id += ":q=" + std::to_string(*datum.q);
  return id;
}

AnnulusEstimate integrate_annulus(const Integrand& f, int p, double r_lo, double r_hi, std::uint64_t samples,
                                  std::uint64_t seed, int strata) {
  if (!(r_lo >= 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("annulus needs 0 <= r_lo < r_hi");
  if (p < 1 || p > 3) throw std::invalid_argument("annulus integration supports p = 1, 2, 3");
  if (strata < 2) throw std::invalid_argument("annulus integration needs at least 2 strata");

  struct Cell {
    double lo0, hi0, lo1, hi1;
  };
  std::vector<Cell> cells;
  if (p == 1) {
    const double w = (r_hi - r_lo) / strata;
    for (int h = 0; h < strata; ++h) cells.push_back({r_lo + h * w, r_lo + (h + 1) * w, 0.0, 0.0});
  } else if (p == 2) {
    const auto edges = two_sided_edges(kQuarterPi, strata, 1e-5);
    for (size_t h = 0; h + 1 < edges.size(); ++h) cells.push_back({edges[h], edges[h + 1], 0.0, 0.0});
  } else {
    const int axis = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(strata)))));
    const auto te = two_sided_edges(kQuarterPi, axis, 1e-3);
    const auto ve = two_sided_edges(1.0, axis, 1e-3);
    for (size_t i = 0; i + 1 < te.size(); ++i) {
      for (size_t j = 0; j + 1 < ve.size(); ++j) cells.push_back({te[i], te[i + 1], ve[j], ve[j + 1]});
    }
  }

  const std::uint64_t per_cell = std::max<std::uint64_t>(2, samples / cells.size());
  double estimate = 0.0;
  double variance = 0.0;
  std::vector<double> lambda(p);
  for (size_t h = 0; h < cells.size(); ++h) {
    const Cell& c = cells[h];
    std::mt19937_64 rng(stats::mix_seed(seed, h));
    stats::RunningStats acc;
    double volume = 0.0;
    if (p == 1) volume = c.hi0 - c.lo0;
    if (p == 2) volume = (c.hi0 - c.lo0) * 0.5 * (r_hi * r_hi - r_lo * r_lo);
    if (p == 3) volume = (c.hi0 - c.lo0) * (c.hi1 - c.lo1) * (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo) / 3.0;
    for (std::uint64_t i = 0; i < per_cell; ++i) {
      double weight = 1.0;
      if (p == 1) {
        lambda[0] = c.lo0 + (c.hi0 - c.lo0) * uniform01(rng);
      } else if (p == 2) {
        const double theta = c.lo0 + (c.hi0 - c.lo0) * uniform01(rng);
        const double rho = std::sqrt(r_lo * r_lo + uniform01(rng) * (r_hi * r_hi - r_lo * r_lo));
        lambda[0] = rho * std::cos(theta);
        lambda[1] = rho * std::sin(theta);
      } else {
        const double theta = c.lo0 + (c.hi0 - c.lo0) * uniform01(rng);
        const double v = c.lo1 + (c.hi1 - c.lo1) * uniform01(rng);
        const double lo3 = r_lo * r_lo * r_lo;
        const double rho = std::cbrt(lo3 + uniform01(rng) * (r_hi * r_hi * r_hi - lo3));
        const double phi_min = std::atan(1.0 / std::sin(theta));
        const double span = 0.5 * kPi - phi_min;
        const double phi = phi_min + v * span;
        lambda[0] = rho * std::sin(phi) * std::cos(theta);
        lambda[1] = rho * std::sin(phi) * std::sin(theta);
        lambda[2] = rho * std::cos(phi);
        weight = std::sin(phi) * span;
      }
      acc.add(volume * weight * f(lambda));
    }
    estimate += acc.mean();
    variance += acc.variance() / static_cast<double>(acc.count());
  }
  AnnulusEstimate out;
  out.estimate = estimate;
  out.std_error = std::sqrt(variance);
  out.flagged = out.std_error > 0.25 * std::abs(out.estimate);
  return out;
}

AnnulusEstimate integrate_annulus(const kernels::IntegrandSpec& spec, double r_lo, double r_hi,
                                  std::uint64_t samples, std::uint64_t seed) {
  auto f = [&spec](std::span<const double> lambda) { return kernels::integrand_phi(spec, lambda); };
  return integrate_annulus(f, spec.datum.rank, r_lo, r_hi, samples, stats::mix_seed(seed, spec_hash(spec)));
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre needs n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double panel_quadrature(const kernels::IntegrandSpec& spec, double r_lo, double r_hi) {
  const int p = spec.datum.rank;
  if (p != 1 && p != 2) throw std::invalid_argument("panel quadrature supports p = 1 and p = 2");
  if (!(r_lo >= 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("panel quadrature needs 0 <= r_lo < r_hi");
  static const QuadratureRule rule = gauss_legendre(16);
  const double h = kPi / (4.0 * spec.k * std::max(max_coord(spec), 1e-300));
  const int n_rho = std::max(1, static_cast<int>(std::ceil((r_hi - r_lo) / h)));
  const double w_rho = (r_hi - r_lo) / n_rho;
  double total = 0.0;
  if (p == 1) {
    double lambda[1];
    for (int i = 0; i < n_rho; ++i) {
      const double mid = r_lo + (i + 0.5) * w_rho;
      double panel = 0.0;
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        lambda[0] = mid + 0.5 * w_rho * rule.nodes[q];
        panel += rule.weights[q] * kernels::integrand_phi(spec, lambda);
      }
      total += 0.5 * w_rho * panel;
    }
    return total;
  }
  const int n_theta = std::max(1, static_cast<int>(std::ceil(r_hi * kQuarterPi / h)));
  const double w_theta = kQuarterPi / n_theta;
  double lambda[2];
  for (int i = 0; i < n_rho; ++i) {
    const double rmid = r_lo + (i + 0.5) * w_rho;
    for (int j = 0; j < n_theta; ++j) {
      const double tmid = (j + 0.5) * w_theta;
      double panel = 0.0;
      for (size_t a = 0; a < rule.nodes.size(); ++a) {
        const double rho = rmid + 0.5 * w_rho * rule.nodes[a];
        for (size_t b = 0; b < rule.nodes.size(); ++b) {
          const double theta = tmid + 0.5 * w_theta * rule.nodes[b];
          lambda[0] = rho * std::cos(theta);
          lambda[1] = rho * std::sin(theta);
          panel += rule.weights[a] * rule.weights[b] * rho * kernels::integrand_phi(spec, lambda);
        }
      }
      total += 0.25 * w_rho * w_theta * panel;
    }
  }
  return total;
}

bool ExponentPrediction::implies_convergence() const {
  if (secondary) return exponent > 1.0 && *secondary > 1.0;
  return exponent > measure_dim;
}

GrowthReport classify_partials(std::vector<Partial> partials) {
  if (partials.size() < 5) throw std::invalid_argument("classification needs at least 5 partials");
  GrowthReport rep;
  rep.partials = std::move(partials);
  for (size_t m = 1; m < rep.partials.size(); ++m) {
    const auto& cur = rep.partials[m];
    const auto& prev = rep.partials[m - 1];
    if (std::isnan(cur.shell)) {
      rep.increments.push_back(cur.integral - prev.integral);
      rep.increment_stderr.push_back(
          std::sqrt(std::max(0.0, cur.std_error * cur.std_error - prev.std_error * prev.std_error)));
    } else {
      rep.increments.push_back(cur.shell);
      rep.increment_stderr.push_back(cur.shell_std_error);
    }
  }
  for (const auto& p : rep.partials) rep.any_flagged = rep.any_flagged || p.flagged;

  const size_t n = rep.increments.size();
  const double* d = rep.increments.data() + (n - 4);
  const double* e = rep.increment_stderr.data() + (n - 4);
  bool positive = true;
  for (int j = 0; j < 4; ++j) positive = positive && d[j] > 0.0;
  if (!positive) {
    bool all_zero = true;
    for (int j = 0; j < 4; ++j) all_zero = all_zero && d[j] == 0.0;
    if (all_zero) {
      rep.classification = Classification::Convergent;
      rep.value = rep.ci_low = rep.ci_high = rep.partials.back().integral;
    } else {
      rep.classification = Classification::Ambiguous;
      rep.value = rep.ci_low = rep.ci_high = kNaN;
    }
    return rep;
  }
  for (int j = 0; j < 3; ++j) rep.ratios.push_back(d[j + 1] / d[j]);
  auto all = [&](auto pred) { return std::all_of(rep.ratios.begin(), rep.ratios.end(), pred); };

  if (all([](double r) { return r <= 0.8; })) {
    const double gm = std::cbrt(rep.ratios[0] * rep.ratios[1] * rep.ratios[2]);
    const double tail = d[3] * gm / (1.0 - gm);
    const Partial& last = rep.partials.back();
    rep.classification = Classification::Convergent;
    rep.value = last.integral + tail;
    const double half = 1.96 * last.std_error + tail;
    rep.ci_low = rep.value - half;
    rep.ci_high = rep.value + half;
  } else if (all([](double r) { return r >= 0.9 && r <= 1.1; })) {
    // Slope per ln R from the mean dyadic increment.
    double mean = 0.0, var_mc = 0.0;
    for (int j = 0; j < 4; ++j) {
      mean += d[j] / 4.0;
      var_mc += e[j] * e[j] / 16.0;
    }
    double spread = 0.0;
    for (int j = 0; j < 4; ++j) spread += (d[j] - mean) * (d[j] - mean) / 3.0;
    const double se = std::sqrt(spread / 4.0 + var_mc) / std::numbers::ln2;
    rep.classification = Classification::LogDivergent;
    rep.value = mean / std::numbers::ln2;
    rep.ci_low = rep.value - stats::t_quantile_975(3) * se;
    rep.ci_high = rep.value + stats::t_quantile_975(3) * se;
  } else if (all([](double r) { return r >= 1.2; })) {
    std::vector<double> logs(3);
    double mean = 0.0;
    for (int j = 0; j < 3; ++j) {
      logs[j] = std::log2(rep.ratios[j]);
      mean += logs[j] / 3.0;
    }
    double spread = 0.0;
    for (double v : logs) spread += (v - mean) * (v - mean) / 2.0;
    const double rel0 = e[0] / d[0];
    const double rel3 = e[3] / d[3];
    const double var_mc = (rel0 * rel0 + rel3 * rel3) / (9.0 * std::numbers::ln2 * std::numbers::ln2);
    const double se = std::sqrt(spread / 3.0 + var_mc);
    rep.classification = Classification::PolyDivergent;
    rep.value = mean;
    rep.ci_low = mean - stats::t_quantile_975(2) * se;
    rep.ci_high = mean + stats::t_quantile_975(2) * se;
  } else {
    rep.classification = Classification::Ambiguous;
    rep.value = rep.ci_low = rep.ci_high = kNaN;
  }
  return rep;
}

GrowthReport growth_scan(const kernels::IntegrandSpec& spec, const ScanOptions& options) {
  if (options.levels < 6) throw std::invalid_argument("growth scan needs at least 6 levels");
  if (!(options.r0 > 0.0)) throw std::invalid_argument("growth scan needs r0 > 0");
  const std::uint64_t base = stats::mix_seed(options.seed, spec_hash(spec));
  auto f = [&spec](std::span<const double> lambda) { return kernels::integrand_phi(spec, lambda); };
  const int p = spec.datum.rank;
  std::vector<Partial> partials;
  double total = 0.0;
  double var = 0.0;
  double r_prev = 0.0;
  for (int m = 0; m <= options.levels; ++m) {
    const double r = options.r0 * std::ldexp(1.0, m);
    const auto est = integrate_annulus(f, p, r_prev, r, options.samples, stats::mix_seed(base, m));
    total += est.estimate;
    var += est.std_error * est.std_error;
    partials.push_back({r, total, std::sqrt(var), est.flagged, est.estimate, est.std_error});
    r_prev = r;
  }
  GrowthReport rep = classify_partials(std::move(partials));
  rep.predicted = predicted_exponents(spec);
  return rep;
}

ExponentPrediction predicted_exponent(Region region, PointClass cls, int k, int r, int p) {
  const double R = 2.0 * r + 1.0;
  auto bad = [&]() -> ExponentPrediction {
    throw std::invalid_argument("no exponent prediction for region " + spaces::to_string(region) + " and class " +
                                spaces::to_string(cls) + " at p = " + std::to_string(p));
  };
  if (p == 1) {
    if (cls != PointClass::Regular) return bad();
    return {R * (k - 1), std::nullopt, 1};
  }
  if (p == 2) {
    switch (cls) {
      case PointClass::Regular:
        if (region == Region::W1) return {R * (k - 1) + 2.0 * k - 2.0, std::nullopt, 2};
        if (region == Region::W2) return {(k - 2.0) * R + 4.0 * k - 4.0, std::nullopt, 2};
        return bad();
      case PointClass::TypeD:
        if (region == Region::W1) return {R * (2.0 * k - 2.0) - 2.0, std::nullopt, 2};
        if (region == Region::W21) return {R * (k - 1) + 2.0 * k - 2.0, std::nullopt, 2};
        if (region == Region::W22) return {(k - 1.0) * R + 2.0 * k - 4.0, std::nullopt, 1};
        return bad();
      case PointClass::TypeA:
        if (region == Region::W1) return {(k - 2.0) * R + 2.0 * k - 2.0, std::nullopt, 2};
        if (region == Region::W21) return {4.0 * k - 5.0 - 2.0 * r, R * (k - 1), 1};
        if (region == Region::W22) return {4.0 * k - 5.0 - 2.0 * r, std::nullopt, 1};
        return bad();
      default:
        return bad();
    }
  }
  if (p == 3 && cls == PointClass::Regular) {
    if (region == Region::W1) return {3.0 * R * (k - 1) + 6.0 * k - 6.0, std::nullopt, 3};
    if (region == Region::W2) return {R * (2.0 * k - 3.0) + 8.0 * k - 8.0, std::nullopt, 3};
    if (region == Region::W3) return {R * (k - 1) + 8.0 * k - 8.0, std::nullopt, 3};
  }
  return bad();
}

std::map<std::string, ExponentPrediction> predicted_exponents(const kernels::IntegrandSpec& spec) {
  std::map<std::string, ExponentPrediction> out;
  const int p = spec.datum.rank;
  const int k = spec.k;
  if (p == 1) {
    const double nu = spec.datum.bessel_order();
    out["tail"] = {(2.0 * nu + 1.0) * (k - 1), std::nullopt, 1};
    return out;
  }
  const int r = spec.datum.r();
  auto put = [&](const std::string& name, Region region) {
    out[name] = predicted_exponent(region, spec.point.cls, k, r, p);
  };
  switch (spec.point.cls) {
    case PointClass::Regular:
      put("W1", Region::W1);
      put("W2", Region::W2);
      if (p == 3) put("W3", Region::W3);
      break;
    case PointClass::TypeD:
      put("W1", Region::W1);
      put("W21", Region::W21);
      put("W22", Region::W22);
      break;
    case PointClass::TypeA:
      put("W1", Region::W1);
      put("W21", Region::W21);
      put("strip", Region::W22);
      break;
    default:
      break;
  }
  return out;
}

RankOneLowerBound lower_bound_rank1(double t, int n) {
  if (!(t > 0.0) || n < 1) throw std::invalid_argument("rank-one lower bound needs t > 0 and N >= 1");
  RankOneLowerBound out;
  // cos^4 >= 1/4 on each interval and J_0(s)^2 ~ 2 / (pi s).
  const double c = 1.0 / (kPi * kPi * t * t);
  double sum = 0.0;
  for (int i = 1; i <= n; ++i) {
    sum += c * std::log((2.0 * i + 1.0) / (2.0 * i));
    out.radii.push_back((2.0 * i + 1.0) * kPi / (2.0 * t));
    out.partial_sums.push_back(sum);
  }
  return out;
}

RectangleLowerBound lower_bound_typeD_rectangles(double x, double eta, int n) {
  if (!(x > 0.0)) throw std::invalid_argument("rectangle bound needs x > 0");
  if (!(eta > 0.0) || !(eta < kQuarterPi)) throw std::invalid_argument("rectangle bound needs 0 < eta < pi/4");
  if (n < 1) throw std::invalid_argument("rectangle bound needs N >= 1");
  RectangleLowerBound out;
  const double c2 = std::cos(eta) * std::cos(eta);
  const double s2 = std::sin(eta) * std::sin(eta);
  const double area = 4.0 * eta * eta / (x * x);
  double sum = 0.0;
  for (int i = 1; i <= n; ++i) {
    Rectangle rect;
    rect.l1_lo = ((i + 1.75) * kPi - eta) / x;
    rect.l1_hi = ((i + 1.75) * kPi + eta) / x;
    rect.l2_lo = ((i + 0.25) * kPi - eta) / x;
    rect.l2_hi = ((i + 0.25) * kPi + eta) / x;
    const double inner = rect.l1_lo * c2 - rect.l2_hi * s2;
    const double spread = rect.l1_hi * rect.l1_hi - rect.l2_lo * rect.l2_lo;
    const double denom = std::pow(kPi * x, 4) * rect.l1_hi * rect.l2_hi * spread * spread;
    rect.bound = area * 16.0 * std::pow(inner, 4) / denom;
    sum += rect.bound;
    out.rectangles.push_back(rect);
    out.partial_sums.push_back(sum);
  }
  return out;
}

std::vector<QuadratureEstimate> rectangle_quadrature(const RectangleLowerBound& bound, double x) {
  kernels::IntegrandSpec spec;
  spec.datum = spaces::aiii_datum(2, 2);
  const double coords[2] = {x, x};
  spec.point = spaces::classify_point(coords);
  spec.k = 2;
  static const QuadratureRule hi = gauss_legendre(16);
  static const QuadratureRule lo = gauss_legendre(10);
  auto integrate = [&](const Rectangle& r, const QuadratureRule& rule) {
    const double h1 = 0.5 * (r.l1_hi - r.l1_lo), m1 = 0.5 * (r.l1_hi + r.l1_lo);
    const double h2 = 0.5 * (r.l2_hi - r.l2_lo), m2 = 0.5 * (r.l2_hi + r.l2_lo);
    double total = 0.0;
    double lambda[2];
    for (size_t a = 0; a < rule.nodes.size(); ++a) {
      for (size_t b = 0; b < rule.nodes.size(); ++b) {
        lambda[0] = m1 + h1 * rule.nodes[a];
        lambda[1] = m2 + h2 * rule.nodes[b];
        total += rule.weights[a] * rule.weights[b] * kernels::integrand_phi(spec, lambda);
      }
    }
    return total * h1 * h2;
  };
  std::vector<QuadratureEstimate> out;
  for (const auto& rect : bound.rectangles) {
    const double v = integrate(rect, hi);
    out.push_back({v, std::abs(v - integrate(rect, lo))});
  }
  return out;
}

MinKResult min_k_scan(const kernels::IntegrandSpec& spec_template, int k_max, const ScanOptions& options) {
  if (k_max < 1 || k_max > 8) throw std::invalid_argument("min-k scan needs 1 <= k_max <= 8");
  MinKResult out;
  out.l1_power = spaces::l1_power_lookup(spec_template.datum, spec_template.point);
  for (int k = 1; k <= k_max; ++k) {
    kernels::IntegrandSpec spec = spec_template;
    spec.k = k;
    GrowthReport rep = growth_scan(spec, options);
    Verdict v;
    v.space = space_id(spec.datum);
    v.cls = spec.point.cls;
    v.k = k;
    v.classification = rep.classification;
    v.in_l1 = k >= out.l1_power;
    v.in_l2 = rep.classification == Classification::Convergent;
    v.dichotomy_holds_at_k = !(v.in_l1 && !v.in_l2);
    out.ambiguous = out.ambiguous || rep.classification == Classification::Ambiguous;
    out.dichotomy_holds = out.dichotomy_holds && v.dichotomy_holds_at_k;
    out.verdicts.push_back(v);
    out.reports.push_back(std::move(rep));
    if (v.in_l2) {
      out.min_k = k;
      break;
    }
  }
  return out;
}

}  // namespace flatsph::dichotomy
