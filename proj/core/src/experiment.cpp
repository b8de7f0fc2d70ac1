#include "flatsph/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "flatsph/dichotomy.hpp"
#include "flatsph/haarmc.hpp"
#include "flatsph/reproduce.hpp"
#include "flatsph/spaces.hpp"
#include "flatsph/specfun.hpp"
#include "flatsph/stats.hpp"

namespace flatsph::experiment {

using nlohmann::json;

namespace {

// Total integrand evaluations a single command may request.
constexpr double kMaxEvaluations = 2e9;

dichotomy::ScanOptions scan_options(const ExperimentConfig& c) {
  dichotomy::ScanOptions o;
  o.r0 = c.r0;
  o.levels = c.levels;
  o.samples = c.samples;
  o.seed = c.seed;
  return o;
}

void check_budget(const ExperimentConfig& c, int powers) {
  if (c.samples < 1000) throw ConfigError("samples must be at least 1000");
  if (c.levels < 6 || c.levels > 20) throw ConfigError("levels must lie in [6, 20]");
  const double evals = static_cast<double>(c.samples) * (c.levels + 1) * powers;
  if (evals > kMaxEvaluations) throw ConfigError("budget exhaustion: " + std::to_string(evals) + " integrand evaluations requested");
}

json prediction_json(const std::map<std::string, dichotomy::ExponentPrediction>& m) {
  json out = json::object();
  for (const auto& [name, e] : m) {
    json j = {{"exponent", e.exponent}, {"measure_dim", e.measure_dim}, {"implies_convergence", e.implies_convergence()}};
    if (e.secondary) j["secondary"] = *e.secondary;
    out[name] = j;
  }
  return out;
}

json growth_json(const kernels::IntegrandSpec& spec, const dichotomy::GrowthReport& rep) {
  json partials = json::array();
  for (const auto& p : rep.partials) {
    partials.push_back({{"R", p.radius}, {"I", p.integral}, {"stderr", p.std_error}, {"flagged", p.flagged}});
  }
  const int l1 = spaces::l1_power_lookup(spec.datum, spec.point);
  const bool in_l1 = spec.k >= l1;
  const bool in_l2 = rep.classification == dichotomy::Classification::Convergent;
  json out = {{"space", dichotomy::space_id(spec.datum)},
              {"point", spec.point.coords},
              {"class", spaces::to_string(spec.point.cls)},
              {"k", spec.k},
              {"partials", partials},
              {"ratios", rep.ratios},
              {"classification", dichotomy::to_string(rep.classification)},
              {"slope_or_exponent", rep.value},
              {"ci", {rep.ci_low, rep.ci_high}},
              {"predicted_exponents", prediction_json(rep.predicted)},
              {"verdict",
               {{"l1_power", l1},
                {"in_l1", in_l1},
                {"in_l2", in_l2},
                {"dichotomy_holds_at_k", !(in_l1 && !in_l2)}}}};
  return out;
}

Table partials_table(const std::string& name, const dichotomy::GrowthReport& rep) {
  Table t{name, {"R", "I", "stderr"}, {}};
  for (const auto& p : rep.partials) t.rows.push_back({p.radius, p.integral, p.std_error});
  return t;
}

// phi along lambda_j = lambda_1 / 2^(j-1).
Table slice_table(const kernels::IntegrandSpec& spec, double r_max) {
  Table t{"integrand_slice", {"lambda", "phi"}, {}};
  const int p = spec.datum.rank;
  constexpr int kPoints = 400;
  std::vector<double> lambda(p);
  for (int i = 1; i <= kPoints; ++i) {
    const double l = r_max * i / kPoints;
    for (int j = 0; j < p; ++j) lambda[j] = std::ldexp(l, -j);
    t.rows.push_back({l, kernels::integrand_phi(spec, lambda)});
  }
  return t;
}

Report dichotomy_scan(const ExperimentConfig& c) {
  check_budget(c, 1);
  const auto spec = integrand_spec(c);
  const auto rep = dichotomy::growth_scan(spec, scan_options(c));
  Report out;
  out.document = growth_json(spec, rep);
  out.ambiguous = rep.classification == dichotomy::Classification::Ambiguous;
  out.tables.push_back(partials_table("growth", rep));
  out.tables.push_back(slice_table(spec, 4.0 * c.r0));
  return out;
}

Report dichotomy_min_k(const ExperimentConfig& c) {
  if (c.k_max < 1 || c.k_max > 8) throw ConfigError("kmax must lie in [1, 8]");
  check_budget(c, c.k_max);
  const auto spec = integrand_spec(c);
  const auto res = dichotomy::min_k_scan(spec, c.k_max, scan_options(c));
  json scans = json::array();
  Report out;
  for (size_t i = 0; i < res.reports.size(); ++i) {
    auto s = spec;
    s.k = res.verdicts[i].k;
    scans.push_back(growth_json(s, res.reports[i]));
    out.tables.push_back(partials_table("growth_k" + std::to_string(s.k), res.reports[i]));
  }
  out.document = {{"space", dichotomy::space_id(spec.datum)},
                  {"point", spec.point.coords},
                  {"class", spaces::to_string(spec.point.cls)},
                  {"min_k", res.min_k ? json(*res.min_k) : json(nullptr)},
                  {"l1_power", res.l1_power},
                  {"dichotomy_holds", res.dichotomy_holds},
                  {"ambiguous", res.ambiguous},
                  {"scans", scans}};
  Table summary{"min_k", {"k", "classification_code", "in_l2"}, {}};
  for (const auto& v : res.verdicts) {
    summary.rows.push_back({static_cast<double>(v.k), static_cast<double>(v.classification), v.in_l2 ? 1.0 : 0.0});
  }
  out.tables.insert(out.tables.begin(), summary);
  out.ambiguous = res.ambiguous;
  return out;
}

Report lowerbound_rank1(const ExperimentConfig& c) {
  const auto lb = dichotomy::lower_bound_rank1(c.t, c.terms);
  kernels::IntegrandSpec spec;
  spec.datum = spaces::rank1_datum(spaces::CartanLabel::AI);
  const double coords[1] = {c.t};
  spec.point = spaces::classify_point(coords);
  spec.k = 2;
  Table t{"lowerbound_rank1", {"R", "partial_sum", "truncated_integral"}, {}};
  json rows = json::array();
  double integral = 0.0, r_prev = 0.0;
  bool dominated = true;
  for (size_t i = 0; i < lb.radii.size(); ++i) {
    integral += dichotomy::panel_quadrature(spec, r_prev, lb.radii[i]);
    r_prev = lb.radii[i];
    dominated = dominated && lb.partial_sums[i] <= integral;
    t.rows.push_back({lb.radii[i], lb.partial_sums[i], integral});
    rows.push_back({{"R", lb.radii[i]}, {"partial_sum", lb.partial_sums[i]}, {"truncated_integral", integral}});
  }
  Report out;
  out.document = {{"t", c.t}, {"terms", c.terms}, {"rows", rows}, {"dominated", dominated}};
  out.tables.push_back(t);
  return out;
}

Report lowerbound_rectangles(const ExperimentConfig& c) {
  const auto lb = dichotomy::lower_bound_typeD_rectangles(c.x, c.eta, c.terms);
  const auto quad = dichotomy::rectangle_quadrature(lb, c.x);
  Table t{"lowerbound_rectangles", {"n", "bound", "partial_sum", "quadrature", "quadrature_error", "quadrature_sum"}, {}};
  json rows = json::array();
  double q_sum = 0.0, q_err = 0.0;
  std::vector<double> ns, sums;
  for (size_t i = 0; i < lb.rectangles.size(); ++i) {
    q_sum += quad[i].value;
    q_err += quad[i].error;
    const auto& r = lb.rectangles[i];
    const double n = static_cast<double>(i + 1);
    t.rows.push_back({n, r.bound, lb.partial_sums[i], quad[i].value, quad[i].error, q_sum});
    rows.push_back({{"n", i + 1},
                    {"lambda1", {r.l1_lo, r.l1_hi}},
                    {"lambda2", {r.l2_lo, r.l2_hi}},
                    {"bound", r.bound},
                    {"partial_sum", lb.partial_sums[i]},
                    {"quadrature", quad[i].value},
                    {"quadrature_error", quad[i].error}});
    if (n >= 10) {
      ns.push_back(n);
      sums.push_back(lb.partial_sums[i]);
    }
  }
  json result = {{"x", c.x}, {"eta", c.eta}, {"terms", c.terms}, {"rows", rows},
                 {"quadrature_sum", q_sum}, {"quadrature_error", q_err}};
  if (ns.size() >= 3) {
    const auto fit = stats::linear_fit(ns, sums);
    result["linear_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
  }
  Report out;
  out.document = result;
  out.tables.push_back(t);
  return out;
}

haarmc::SpaceSpec mc_space(const ExperimentConfig& c) {
  if (c.space == "AI" || c.space == "rank1:AI") return haarmc::ai_space();
  if (c.space == "aiii" || c.space == "AIII") return haarmc::aiii_space(c.p, c.q.value_or(c.p + 1));
  throw haarmc::UnsupportedSpace("mc validate supports AI and aiii, got " + c.space);
}

Report mc_validate(const ExperimentConfig& c) {
  const auto space = mc_space(c);
  auto factors = c.factors;
  if (factors.empty()) {
    factors = space.kind == haarmc::SpaceKind::AI ? std::vector<std::vector<double>>{{1.0}, {1.0}}
                                                   : std::vector<std::vector<double>>{{2.0, 1.0}, {2.0, 1.0}};
  }
  const auto grid = haarmc::default_grid(space, c.grid);
  const auto single = haarmc::sample_orbit_sum(space, {factors.front()}, c.n, stats::mix_seed(c.seed, 1));
  const auto fit = haarmc::calibrate_scale(single, grid);
  const auto set = haarmc::sample_orbit_sum(space, factors, c.n, stats::mix_seed(c.seed, 2));
  const auto rep = haarmc::validate_product_formula(set, grid, fit.s);

  Table t{"mc_validate", {}, {}};
  for (int j = 0; j < space.rank(); ++j) t.columns.push_back("lambda" + std::to_string(j + 1));
  for (const char* col : {"empirical_re", "empirical_im", "stderr", "predicted", "pass"}) t.columns.push_back(col);
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"lambda", r.lambda},
                    {"empirical_re", r.empirical.real()},
                    {"empirical_im", r.empirical.imag()},
                    {"stderr", r.std_error},
                    {"predicted", r.predicted},
                    {"pass", r.pass}});
    std::vector<double> row = r.lambda;
    row.insert(row.end(), {r.empirical.real(), r.empirical.imag(), r.std_error, r.predicted, r.pass ? 1.0 : 0.0});
    t.rows.push_back(row);
  }
  Report out;
  out.document = {{"space", haarmc::to_string(space)},
                  {"factors", factors},
                  {"n", c.n},
                  {"calibration", {{"s", fit.s}, {"max_residual_sigma", fit.max_residual_sigma}}},
                  {"rows", rows},
                  {"passed", rep.passed},
                  {"failures", rep.failures}};
  out.tables.push_back(t);
  return out;
}

Report kernel_eval(const ExperimentConfig& c) {
  if (c.lambdas.empty()) throw ConfigError("kernel eval needs at least one lambda row");
  Report out;
  Table t{"kernel", {}, {}};
  json rows = json::array();
  const bool rank1 = c.space.rfind("rank1:", 0) == 0;
  const int dim = rank1 ? 1 : c.p;
  for (int j = 0; j < dim; ++j) t.columns.push_back("lambda" + std::to_string(j + 1));
  t.columns.insert(t.columns.end(), {"value", "conditioning"});
  for (const auto& l : c.lambdas) {
    if (static_cast<int>(l.size()) != dim) throw ConfigError("lambda row has the wrong rank");
    kernels::KernelValue v;
    if (rank1) {
      const auto datum = spaces::rank1_datum(spaces::parse_cartan_label(c.space.substr(6)), c.q);
      v.value = kernels::kernel_rank1(specfun::BesselOrder(datum.bessel_order()), c.t, l[0]);
    } else {
      const auto datum = spaces::aiii_datum(c.p, c.q.value_or(c.p));
      if (static_cast<int>(c.point.size()) != c.p) throw ConfigError("point must have p coordinates");
      v = kernels::spherical_kernel(datum.r(), c.point, l);
    }
    std::vector<double> row = l;
    row.insert(row.end(), {v.value, v.conditioning});
    t.rows.push_back(row);
    rows.push_back({{"lambda", l}, {"value", v.value}, {"conditioning", v.conditioning}, {"confluent", v.confluent}});
  }
  out.document = {{"space", c.space}, {"point", rank1 ? std::vector<double>{c.t} : c.point}, {"rows", rows}};
  out.tables.push_back(t);
  return out;
}

Report specfun_check(const ExperimentConfig&) {
  // Closed forms at half-integer order, and the three-term recurrence at the others.
  double closed_err = 0.0, recur_err = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double s = 0.1 * i;
    const double j05 = std::sqrt(2.0 / (std::numbers::pi * s)) * std::sin(s);
    const double j15 = std::sqrt(2.0 / (std::numbers::pi * s)) * (std::sin(s) / s - std::cos(s));
    closed_err = std::max(closed_err, std::abs(specfun::bessel_j(specfun::BesselOrder(0.5), s) - j05));
    closed_err = std::max(closed_err, std::abs(specfun::bessel_j(specfun::BesselOrder(1.5), s) - j15));
    for (int nu : {1, 3, 4, 7}) {
      const double lhs = specfun::bessel_j_int(nu - 1, s) + specfun::bessel_j_int(nu + 1, s);
      const double rhs = 2.0 * nu / s * specfun::bessel_j_int(nu, s);
      recur_err = std::max(recur_err, std::abs(lhs - rhs));
    }
  }
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(10.0 * std::pow(1000.0, i / 400.0));
  json envelopes = json::array();
  Table t{"envelopes", {"r", "quantity", "constant", "exponent"}, {}};
  bool ok = true;
  for (int r = 0; r <= 3; ++r) {
    for (auto q : {specfun::EnvelopeQuantity::Value, specfun::EnvelopeQuantity::FirstDerivative,
                   specfun::EnvelopeQuantity::SecondDerivative}) {
      const char* name = q == specfun::EnvelopeQuantity::Value ? "f" : q == specfun::EnvelopeQuantity::FirstDerivative ? "f'" : "f''";
      try {
        const auto b = specfun::envelope_check(q, r, grid);
        envelopes.push_back({{"r", r}, {"quantity", name}, {"constant", b.constant}, {"exponent", b.exponent}, {"holds", true}});
        t.rows.push_back({static_cast<double>(r), static_cast<double>(q), b.constant, b.exponent});
      } catch (const specfun::EnvelopeViolation& e) {
        ok = false;
        envelopes.push_back({{"r", r}, {"quantity", name}, {"holds", false}, {"error", e.what()}});
      }
    }
  }
  Report out;
  out.document = {{"closed_form_max_abs_error", closed_err},
                  {"recurrence_max_abs_error", recur_err},
                  {"envelopes", envelopes},
                  {"envelopes_hold", ok}};
  out.tables.push_back(t);
  return out;
}

Report reproduce_paper(const ExperimentConfig& c) {
  check_budget(c, 40);
  const auto rows = reproduce::reproduce_all(scan_options(c));
  Report out;
  bool all = true;
  bool ambiguous = false;
  Table t{"reproduce", {"row", "pass", "ambiguous"}, {}};
  for (size_t i = 0; i < rows.size(); ++i) {
    all = all && rows[i].passed();
    ambiguous = ambiguous || rows[i].ambiguous();
    t.rows.push_back({static_cast<double>(i), rows[i].passed() ? 1.0 : 0.0, rows[i].ambiguous() ? 1.0 : 0.0});
  }
  out.document = {{"rows", reproduce::to_json(rows)}, {"all_pass", all}};
  out.tables.push_back(t);
  out.ambiguous = ambiguous;
  return out;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  return {{"command", c.command}, {"space", c.space},   {"p", c.p},
          {"q", c.q ? json(*c.q) : json(nullptr)},      {"point", c.point},
          {"t", c.t},             {"k", c.k},           {"kmax", c.k_max},
          {"r0", c.r0},           {"levels", c.levels}, {"samples", c.samples},
          {"seed", c.seed},       {"x", c.x},           {"eta", c.eta},
          {"terms", c.terms},     {"factors", c.factors}, {"n", c.n},
          {"grid", c.grid},       {"lambdas", c.lambdas}, {"format", c.format},
          {"output", c.output},   {"plotdata", c.plotdata}, {"strict", c.strict}};
}

ExperimentConfig from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"command", "space", "p",       "q",       "point",  "t",
                                              "k",       "kmax",  "r0",      "levels",  "samples", "seed",
                                              "x",       "eta",   "terms",   "factors", "n",       "grid",
                                              "lambdas", "format", "output", "plotdata", "strict"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);
  }
  try {
    take(j, "command", c.command);
    take(j, "space", c.space);
    take(j, "p", c.p);
    if (j.contains("q")) c.q = j.at("q").is_null() ? std::nullopt : std::optional<int>(j.at("q").get<int>());
    take(j, "point", c.point);
    take(j, "t", c.t);
    take(j, "k", c.k);
    take(j, "kmax", c.k_max);
    take(j, "r0", c.r0);
    take(j, "levels", c.levels);
    take(j, "samples", c.samples);
    take(j, "seed", c.seed);
    take(j, "x", c.x);
    take(j, "eta", c.eta);
    take(j, "terms", c.terms);
    take(j, "factors", c.factors);
    take(j, "n", c.n);
    take(j, "grid", c.grid);
    take(j, "lambdas", c.lambdas);
    take(j, "format", c.format);
    take(j, "output", c.output);
    take(j, "plotdata", c.plotdata);
    take(j, "strict", c.strict);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.format != "json" && c.format != "csv") throw ConfigError("format must be json or csv");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  return from_json(j);
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty vector");
  return out;
}

std::vector<std::vector<double>> parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) out.push_back(parse_vector(row));
  if (out.empty()) throw ConfigError("empty matrix");
  return out;
}

kernels::IntegrandSpec integrand_spec(const ExperimentConfig& c) {
  kernels::IntegrandSpec spec;
  spec.k = c.k;
  if (c.k < 1 || c.k > 8) throw ConfigError("k must lie in [1, 8]");
  if (c.space.rfind("rank1:", 0) == 0) {
    spec.datum = spaces::rank1_datum(spaces::parse_cartan_label(c.space.substr(6)), c.q);
    const double coords[1] = {c.t};
    spec.point = spaces::classify_point(coords);
  } else if (c.space == "aiii" || c.space == "AIII") {
    spec.datum = spaces::aiii_datum(c.p, c.q.value_or(c.p));
    std::vector<double> x = c.point;
    if (x.empty()) {
      for (int j = 0; j < c.p; ++j) x.push_back(c.p - j);
    }
    if (static_cast<int>(x.size()) != c.p) throw ConfigError("point must have p coordinates");
    spec.point = spaces::classify_point(x);
  } else {
    throw spaces::InvalidSpace("unknown space '" + c.space + "' (use rank1:LABEL or aiii)");
  }
  if (spec.point.cls == spaces::PointClass::Zero) throw spaces::InvalidPoint("the zero orbit is a point mass");
  return spec;
}

Report run(const ExperimentConfig& c) {
  Report out;
  if (c.command == "dichotomy scan") {
    out = dichotomy_scan(c);
  } else if (c.command == "dichotomy min-k") {
    out = dichotomy_min_k(c);
  } else if (c.command == "lowerbound rank1") {
    out = lowerbound_rank1(c);
  } else if (c.command == "lowerbound rectangles") {
    out = lowerbound_rectangles(c);
  } else if (c.command == "mc validate") {
    out = mc_validate(c);
  } else if (c.command == "kernel eval") {
    out = kernel_eval(c);
  } else if (c.command == "specfun check") {
    out = specfun_check(c);
  } else if (c.command == "report reproduce-paper") {
    out = reproduce_paper(c);
  } else if (c.command == "spaces dump") {
    out.document = spaces::dump_root_table();
  } else {
    throw ConfigError("unknown command '" + c.command + "'");
  }
  out.document = finalize(c, std::move(out.document));
  return out;
}

json finalize(const ExperimentConfig& config, json result) {
  json doc = {{"config", to_json(config)}, {"result", std::move(result)}};
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << stats::fnv1a64(doc.dump());
  doc["content_hash"] = hex.str();
  return doc;
}

std::string render_csv(const Table& table) {
  std::ostringstream os;
  for (size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << "\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::vector<std::string> emit_plotdata(const Report& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& t : report.tables) {
    const auto path = (std::filesystem::path(dir) / (t.name + ".csv")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << render_csv(t);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace flatsph::experiment
