#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flatsph/experiment.hpp"

using namespace flatsph::experiment;
using nlohmann::json;

namespace {

ExperimentConfig small_scan() {
  ExperimentConfig c;
  c.command = "dichotomy scan";
  c.space = "rank1:AII";
  c.levels = 6;
  c.samples = 2000;
  c.r0 = 4.0;
  return c;
}

}  // namespace

TEST(Config, RoundTrip) {
  ExperimentConfig c = small_scan();
  c.q = 4;
  c.point = {2.0, 1.0};
  c.factors = {{2.0, 1.0}, {1.0, 0.0}};
  c.lambdas = {{1.0, 0.5}};
  c.format = "csv";
  c.strict = true;
  const json j = to_json(c);
  const ExperimentConfig back = from_json(j);
  EXPECT_EQ(to_json(back), j);
}

TEST(Config, OverlayKeepsUnsetFields) {
  ExperimentConfig base = small_scan();
  const auto c = from_json(json{{"k", 3}}, base);
  EXPECT_EQ(c.k, 3);
  EXPECT_EQ(c.space, "rank1:AII");
  EXPECT_EQ(c.levels, 6);
}

TEST(Config, Rejects) {
  EXPECT_THROW(from_json(json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(from_json(json{{"format", "xml"}}), ConfigError);
  EXPECT_THROW(from_json(json{{"k", "two"}}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/flatsph.json"), ConfigError);
}

TEST(Config, LoadsFile) {
  const auto path = std::filesystem::temp_directory_path() / "flatsph_cfg_test.json";
  {
    std::ofstream out(path);
    out << R"({"command": "dichotomy scan", "space": "rank1:FII", "seed": 7})";
  }
  const auto c = load_config(path.string());
  EXPECT_EQ(c.space, "rank1:FII");
  EXPECT_EQ(c.seed, 7u);
  std::filesystem::remove(path);
}

TEST(Parse, VectorsAndMatrices) {
  EXPECT_EQ(parse_vector("2,1"), (std::vector<double>{2.0, 1.0}));
  EXPECT_EQ(parse_vector(" 3.5 "), (std::vector<double>{3.5}));
  EXPECT_EQ(parse_matrix("2,1;1,0"), (std::vector<std::vector<double>>{{2.0, 1.0}, {1.0, 0.0}}));
  EXPECT_THROW(parse_vector(""), ConfigError);
  EXPECT_THROW(parse_vector("1,x"), ConfigError);
  EXPECT_THROW(parse_matrix(""), ConfigError);
}

TEST(Spec, BuildsIntegrands) {
  ExperimentConfig c;
  c.space = "aiii";
  c.p = 2;
  c.q = 3;
  c.point = {1.0, 1.0};
  EXPECT_EQ(integrand_spec(c).point.cls, flatsph::spaces::PointClass::TypeD);
  c.point = {0.0, 0.0};
  EXPECT_THROW(integrand_spec(c), flatsph::spaces::InvalidPoint);
  c.point = {1.0};
  EXPECT_THROW(integrand_spec(c), ConfigError);
}

TEST(Finalize, HashTracksContent) {
  const ExperimentConfig c = small_scan();
  const auto a = finalize(c, json{{"v", 1}});
  const auto b = finalize(c, json{{"v", 1}});
  const auto d = finalize(c, json{{"v", 2}});
  EXPECT_EQ(a["content_hash"], b["content_hash"]);
  EXPECT_NE(a["content_hash"], d["content_hash"]);
  EXPECT_EQ(a["content_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(a["config"], to_json(c));
}

TEST(Run, ScanIsDeterministic) {
  const auto a = run(small_scan());
  const auto b = run(small_scan());
  EXPECT_EQ(a.document.dump(), b.document.dump());
  const auto& r = a.document["result"];
  EXPECT_EQ(r["partials"].size(), 7u);  // inner ball plus one per level
  EXPECT_TRUE(r.contains("classification"));
  EXPECT_TRUE(r["verdict"].contains("dichotomy_holds_at_k"));
  auto c = small_scan();
  c.seed += 1;
  EXPECT_NE(run(c).document["content_hash"], a.document["content_hash"]);
}

TEST(Run, BudgetAndUnknownCommand) {
  auto c = small_scan();
  c.samples = 10;
  EXPECT_THROW(run(c), ConfigError);
  c = small_scan();
  c.command = "dichotomy sideways";
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Run, KernelEvalCsv) {
  ExperimentConfig c;
  c.command = "kernel eval";
  c.space = "aiii";
  c.p = 2;
  c.q = 3;
  c.point = {2.0, 1.0};
  c.lambdas = {{0.0, 0.0}, {3.0, 1.0}};
  const auto rep = run(c);
  ASSERT_FALSE(rep.tables.empty());
  const auto csv = render_csv(rep.tables.front());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda1,lambda2,value,conditioning");
  EXPECT_NEAR(rep.document["result"]["rows"][0]["value"].get<double>(), 1.0, 1e-12);
}

TEST(Run, SpacesDump) {
  ExperimentConfig c;
  c.command = "spaces dump";
  const auto rep = run(c);
  EXPECT_TRUE(rep.document["result"].is_array());
  EXPECT_FALSE(rep.document["result"].empty());
}

TEST(Plotdata, OneFilePerTable) {
  const auto rep = run(small_scan());
  const auto dir = std::filesystem::temp_directory_path() / "flatsph_plot_test";
  std::filesystem::remove_all(dir);
  const auto paths = emit_plotdata(rep, dir.string());
  ASSERT_EQ(paths.size(), rep.tables.size());
  for (size_t i = 0; i < paths.size(); ++i) {
    std::ifstream in(paths[i]);
    std::string header;
    std::getline(in, header);
    std::string expected;
    for (size_t j = 0; j < rep.tables[i].columns.size(); ++j) expected += (j ? "," : "") + rep.tables[i].columns[j];
    EXPECT_EQ(header, expected);
  }
  std::filesystem::remove_all(dir);
}
