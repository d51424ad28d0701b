#include <gtest/gtest.h>

#include <confspec/parallel.hpp>
#include <confspec/report.hpp>

#include <cstdio>
#include <fstream>

using namespace confspec;

BoundConfig cardioid_config() {
  BoundConfig c;
  c.map = "cardioid";
  c.p = 1.8;
  c.alpha = 4.0;
  return c;
}

TEST(MapSpec, CatalogInlineAndFile) {
  EXPECT_EQ(parse_map_spec("koebe").kind(), MapKind::Koebe);
  const ConformalMap poly = parse_map_spec(R"({"kind": "polynomial", "coeffs": [[1,0],[2,0],[1,0]], "label": "c"})");
  EXPECT_EQ(poly.kind(), MapKind::Polynomial);
  EXPECT_EQ(poly.label(), "c");
  EXPECT_EQ(poly.coeffs().size(), 3u);
  const ConformalMap pw = parse_map_spec(R"({"kind": "power", "exponent": 1.5})");
  EXPECT_EQ(pw.exponent(), 1.5);

  const std::string path = ::testing::TempDir() + "map_spec.json";
  std::ofstream(path) << R"({"kind": "polynomial", "coeffs": [0, 1, 0.25]})";
  EXPECT_EQ(parse_map_spec(path).coeffs().size(), 3u);
  std::remove(path.c_str());
}

TEST(MapSpec, Rejections) {
  auto kind_of = [](const std::string& s) {
    try {
      parse_map_spec(s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::SolverFailure;
  };
  EXPECT_EQ(kind_of(R"({"kind": "ellipse"})"), ErrorKind::InvalidMapSpec);
  EXPECT_EQ(kind_of(R"({"kind": "power", "exponent": 1.5, "extra": 1})"), ErrorKind::InvalidMapSpec);
  EXPECT_EQ(kind_of(R"({"kind": "polynomial", "coeffs": [[1]]})"), ErrorKind::InvalidMapSpec);
  EXPECT_EQ(kind_of("{not json"), ErrorKind::InvalidMapSpec);
  EXPECT_EQ(kind_of("/nonexistent/map.json"), ErrorKind::InvalidMapSpec);
}

TEST(Config, UnknownKeysRejected) {
  BoundConfig c;
  try {
    apply_config_json(c, nlohmann::json::parse(R"({"p": 1.7, "colour": "red"})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
  apply_config_json(c, nlohmann::json::parse(R"({"p": 1.7, "alpha": 6, "q_grid": 65, "output": "text"})"));
  EXPECT_EQ(c.p, 1.7);
  EXPECT_EQ(*c.alpha, 6.0);
  EXPECT_EQ(c.q_grid, 65);
  EXPECT_EQ(c.output, OutputFormat::Text);
  EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"q_grid": 1.5})")), Error);
}

TEST(Json, WriterFormatting) {
  JsonWriter w;
  w.begin_object().real("x", 0.1).real("n", std::nullopt).begin_array("a").end_array();
  w.begin_array("b").integer({}, 1).string({}, "q\"").end_array().end_object();
  const auto parsed = nlohmann::json::parse(w.str());
  EXPECT_EQ(parsed["x"].get<double>(), 0.1);
  EXPECT_TRUE(parsed["n"].is_null());
  EXPECT_EQ(parsed["b"][1], "q\"");
  EXPECT_NE(w.str().find("1.000000000000e-01"), std::string::npos);
  EXPECT_EQ(format_real(INFINITY), "null");
}

TEST(CmdBound, CardioidReport) {
  const CommandResult r = cmd_bound(cardioid_config());
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const auto j = nlohmann::json::parse(r.output);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["target"], "eigenvalue_bound");
  EXPECT_NEAR(j["mu_p_lower_bound"].get<double>() * j["bound_value"].get<double>(), 1.0, 1e-11);
  EXPECT_TRUE(j.contains("best_q"));
  EXPECT_TRUE(j["config"].contains("seed"));
  EXPECT_EQ(j["config"]["map"]["kind"], "cardioid");
  EXPECT_TRUE(j["convex_comparison"].is_null());
  EXPECT_EQ(j["quadrature_statuses"].size(), 2u);
  // Key order is fixed.
  EXPECT_LT(r.output.find("\"schema\""), r.output.find("\"config\""));
  EXPECT_LT(r.output.find("\"window\""), r.output.find("\"best_q\""));
}

TEST(CmdBound, ExitCodes) {
  BoundConfig koebe = cardioid_config();
  koebe.map = "koebe";
  const CommandResult k = cmd_bound(koebe);
  EXPECT_EQ(k.exit_code, 3);
  EXPECT_NE(k.message.find("AlphaNotRegularForMap"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(k.output)["error"]["kind"], "AlphaNotRegularForMap");

  BoundConfig low = cardioid_config();
  low.p = 1.45;
  const CommandResult l = cmd_bound(low);
  EXPECT_EQ(l.exit_code, 2);
  EXPECT_NE(l.message.find("(alpha+2)/alpha"), std::string::npos);

  BoundConfig none = cardioid_config();
  none.alpha.reset();
  EXPECT_EQ(cmd_bound(none).exit_code, 2);
}

TEST(CmdBound, TargetsAndConvexComparison) {
  BoundConfig c = cardioid_config();
  c.alpha = 8.0;
  c.r_or_s = 2.0;
  c.diameter = 4.0;
  auto j = nlohmann::json::parse(cmd_bound(c).output);
  EXPECT_EQ(j["target"], "unweighted_constant");
  EXPECT_TRUE(j["mu_p_lower_bound"].is_null());
  EXPECT_NEAR(j["convex_comparison"]["value"].get<double>(), convex_comparison_bound(1.8, 4.0), 1e-11);
  c.alpha.reset();
  c.r_or_s = 3.0;
  j = nlohmann::json::parse(cmd_bound(c).output);
  EXPECT_EQ(j["target"], "weighted_constant");
}

TEST(CmdBound, TextAndCsv) {
  BoundConfig c = cardioid_config();
  c.output = OutputFormat::Text;
  EXPECT_NE(cmd_bound(c).output.find("mu_p_lower_bound: "), std::string::npos);
  c.output = OutputFormat::Csv;
  const std::string csv = cmd_bound(c).output;
  EXPECT_EQ(csv.rfind(csv_header(), 0), 0u);
}

TEST(CmdBound, DeterministicAcrossThreads) {
  set_thread_count(1);
  const std::string a = cmd_bound(cardioid_config()).output;
  set_thread_count(4);
  const std::string b = cmd_bound(cardioid_config()).output;
  set_thread_count(-1);
  EXPECT_EQ(a, b);
}

TEST(CmdRegularity, Koebe) {
  BoundConfig c;
  c.map = "koebe";
  const auto j = nlohmann::json::parse(cmd_regularity(c).output);
  EXPECT_NEAR(j["alpha_max"].get<double>(), 2.0 / 3.0, 0.02);
  EXPECT_FALSE(j["is_conformal_regular"].get<bool>());
  EXPECT_GE(j["probe_log"].size(), 3u);
  c.map = "identity";
  const auto i = nlohmann::json::parse(cmd_regularity(c).output);
  EXPECT_TRUE(i["alpha_max"].is_null());
  EXPECT_EQ(i["alpha_max_text"], ">= 6.400000000000e+01");
  EXPECT_TRUE(i["is_conformal_regular"].get<bool>());
}

TEST(CmdValidate, VerdictAndMesh) {
  BoundConfig c;
  c.map = "identity";
  c.p = 1.8;
  c.alpha = 8.0;
  c.oracle_n = 16;
  c.restarts = 2;
  const std::string off = ::testing::TempDir() + "oracle.off";
  const CommandResult r = cmd_validate(c, off);
  EXPECT_EQ(r.exit_code, 0) << r.message;
  EXPECT_EQ(nlohmann::json::parse(r.output)["verdict"], "PASS");
  std::ifstream in(off);
  std::string magic;
  in >> magic;
  EXPECT_EQ(magic, "OFF");
  std::remove(off.c_str());
  c.map = "koebe";
  c.alpha = 4.0;
  EXPECT_EQ(cmd_validate(c).exit_code, 3);
}

TEST(Range, Parsing) {
  EXPECT_EQ(parse_range("1.5:1.95:0.05").size(), 10u);
  EXPECT_EQ(parse_range("1.8").size(), 1u);
  EXPECT_TRUE(parse_range("1.9:1.5:0.1").empty());
  EXPECT_THROW(parse_range("1.5:x:0.1"), Error);
  EXPECT_THROW(parse_range("1.5:1.6:0"), Error);
}

TEST(CmdSweep, RowsAndFlags) {
  BoundConfig c = cardioid_config();
  const CommandResult empty = cmd_sweep(c, "1.9:1.5:0.1", "");
  EXPECT_EQ(empty.output, csv_header());
  const CommandResult r = cmd_sweep(c, "1.45:1.95:0.1", "");
  ASSERT_EQ(r.exit_code, 0);
  std::istringstream is(r.output);
  std::string line;
  std::getline(is, line);
  int rows = 0;
  int flagged = 0;
  double prev_qmax = 0;
  while (std::getline(is, line)) {
    ++rows;
    if (line.find("ParameterOutOfRange") != std::string::npos) {
      ++flagged;
      continue;
    }
    EXPECT_NE(line.find(",ok,"), std::string::npos) << line;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    const double qmax = std::stod(cells[8]);
    EXPECT_NEAR(qmax, make_window(std::stod(cells[1]), {}, 4.0).q_max, 1e-11);
    EXPECT_GT(qmax, prev_qmax);
    prev_qmax = qmax;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(flagged, 1);  // p = 1.45 lies below (alpha+2)/alpha = 1.5
}
