#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flatsph/experiment.hpp"

namespace {

using flatsph::experiment::ExperimentConfig;

// Raw flag values; only the ones given on the command line override the config.
struct Flags {
  std::string config;
  std::optional<std::string> space, point, factors, lambdas, format, output, plotdata;
  std::optional<int> p, q, k, kmax, levels, terms, grid;
  std::optional<double> t, r0, x, eta;
  std::optional<std::uint64_t> samples, seed, n;
  bool strict = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; flags override its keys");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--output,-o", f.output, "Write the report here instead of stdout");
  sub->add_option("--plotdata", f.plotdata, "Directory for plot CSV series");
}

void add_space(CLI::App* sub, Flags& f) {
  sub->add_option("--space", f.space, "rank1:LABEL or aiii");
  sub->add_option("--p", f.p, "Rank of the aiii space");
  sub->add_option("--q", f.q, "Second index (aiii, and rank-one AIII/BDI/CII)");
  sub->add_option("--point", f.point, "Orbit point, e.g. 2,1");
  sub->add_option("--t", f.t, "Rank-one orbit radius");
}

void add_scan(CLI::App* sub, Flags& f) {
  sub->add_option("--levels", f.levels, "Dyadic levels after the initial ball");
  sub->add_option("--samples", f.samples, "Monte Carlo samples per annulus");
  sub->add_option("--r0", f.r0, "Initial ball radius");
}

ExperimentConfig build_config(const std::string& command, const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : flatsph::experiment::load_config(f.config);
  c.command = command;
  if (const char* env = std::getenv("SEED"); env && *env) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw flatsph::experiment::ConfigError(std::string("SEED is not an integer: ") + env);
    }
  }
  if (f.space) c.space = *f.space;
  if (f.p) c.p = *f.p;
  if (f.q) c.q = *f.q;
  if (f.point) c.point = flatsph::experiment::parse_vector(*f.point);
  if (f.t) c.t = *f.t;
  if (f.k) c.k = *f.k;
  if (f.kmax) c.k_max = *f.kmax;
  if (f.levels) c.levels = *f.levels;
  if (f.samples) c.samples = *f.samples;
  if (f.r0) c.r0 = *f.r0;
  if (f.seed) c.seed = *f.seed;
  if (f.x) c.x = *f.x;
  if (f.eta) c.eta = *f.eta;
  if (f.terms) c.terms = *f.terms;
  if (f.factors) c.factors = flatsph::experiment::parse_matrix(*f.factors);
  if (f.lambdas) c.lambdas = flatsph::experiment::parse_matrix(*f.lambdas);
  if (f.n) c.n = *f.n;
  if (f.grid) c.grid = *f.grid;
  if (f.format) c.format = *f.format;
  if (f.output) c.output = *f.output;
  if (f.plotdata) c.plotdata = *f.plotdata;
  if (f.strict) c.strict = true;
  return flatsph::experiment::from_json(flatsph::experiment::to_json(c));
}

int execute(const ExperimentConfig& c) {
  const auto report = flatsph::experiment::run(c);
  std::string body;
  if (c.format == "csv") {
    body = report.tables.empty() ? std::string() : flatsph::experiment::render_csv(report.tables.front());
  } else {
    body = report.document.dump(2) + "\n";
  }
  if (c.output.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(c.output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + c.output);
    out << body;
  }
  if (!c.plotdata.empty()) {
    for (const auto& path : flatsph::experiment::emit_plotdata(report, c.plotdata)) std::cerr << "wrote " << path << "\n";
  }
  if (c.strict && report.ambiguous) {
    std::cerr << "strict: ambiguous classification\n";
    return 3;
  }
  if (c.strict && report.document["result"].contains("all_pass") && !report.document["result"]["all_pass"].get<bool>()) {
    std::cerr << "strict: reproduction failed\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Square integrability of orbital measure convolutions on flat symmetric spaces"};
  app.require_subcommand(1);
  Flags f;
  std::string command;
  auto leaf = [&](CLI::App* group, const std::string& name, const std::string& help) {
    auto* sub = group->add_subcommand(name, help);
    add_common(sub, f);
    sub->callback([&command, group, name] { command = group->get_name() + " " + name; });
    return sub;
  };

  auto* specfun = app.add_subcommand("specfun", "Special functions")->require_subcommand(1);
  leaf(specfun, "check", "Accuracy and envelope summary");

  auto* kernel = app.add_subcommand("kernel", "Spherical functions")->require_subcommand(1);
  auto* eval = leaf(kernel, "eval", "Evaluate the kernel at rows of lambda");
  add_space(eval, f);
  eval->add_option("--lambdas", f.lambdas, "Spectral points, e.g. \"3,1;1,0.5\"");

  auto* dich = app.add_subcommand("dichotomy", "Square integrability scans")->require_subcommand(1);
  auto* scan = leaf(dich, "scan", "Nested-ball growth scan at one power k");
  add_space(scan, f);
  add_scan(scan, f);
  scan->add_option("--k", f.k, "Convolution power");
  scan->add_flag("--strict", f.strict, "Exit nonzero on an Ambiguous classification");
  auto* mink = leaf(dich, "min-k", "Smallest power whose transform is square integrable");
  add_space(mink, f);
  add_scan(mink, f);
  mink->add_option("--kmax", f.kmax, "Largest power tried");
  mink->add_flag("--strict", f.strict, "Exit nonzero on an Ambiguous classification");

  auto* lb = app.add_subcommand("lowerbound", "Analytic lower bounds")->require_subcommand(1);
  auto* lb1 = leaf(lb, "rank1", "Rank-one nu = 0 interval bound against truncated integrals");
  lb1->add_option("--t", f.t, "Orbit radius");
  lb1->add_option("--terms", f.terms, "Number of intervals");
  auto* lbr = leaf(lb, "rectangles", "Type D rectangle bound against quadrature");
  lbr->add_option("--x", f.x, "Type D coordinate");
  lbr->add_option("--eta", f.eta, "Rectangle half width (times 1/x)");
  lbr->add_option("--terms", f.terms, "Number of rectangles");

  auto* mc = app.add_subcommand("mc", "Haar Monte Carlo")->require_subcommand(1);
  auto* val = leaf(mc, "validate", "Product formula check against sampled convolutions");
  val->add_option("--space", f.space, "AI or aiii");
  val->add_option("--p", f.p, "aiii rank");
  val->add_option("--q", f.q, "aiii second index");
  val->add_option("--factors", f.factors, "Factors, e.g. \"2,1;2,1\"");
  val->add_option("--n", f.n, "Samples");
  val->add_option("--grid", f.grid, "Grid points");

  auto* report = app.add_subcommand("report", "Aggregated reports")->require_subcommand(1);
  auto* repro = leaf(report, "reproduce-paper", "One pass/fail row per dichotomy result");
  add_scan(repro, f);
  repro->add_flag("--strict", f.strict, "Ambiguous counts as failure");

  auto* sp = app.add_subcommand("spaces", "Root data")->require_subcommand(1);
  leaf(sp, "dump", "Print the multiplicity table");

  CLI11_PARSE(app, argc, argv);
  try {
    return execute(build_config(command, f));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
