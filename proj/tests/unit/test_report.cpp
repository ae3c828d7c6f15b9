#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "choose4/report.hpp"
#include "support/table1.hpp"

using namespace choose4;
using nlohmann::json;

namespace {

json run_bundled(const std::string& name) { return execute(parse_config(bundled_config(name).document)); }

void expect_tagged(const json& j, const std::string& where) {
  if (j.is_object()) {
    if (j.contains("value") && j.at("value").is_number() && j.size() <= 6) {
      EXPECT_TRUE(j.contains("source")) << where;
    }
    for (const auto& [k, v] : j.items()) expect_tagged(v, where + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) expect_tagged(j[i], where + "[" + std::to_string(i) + "]");
  }
}

}  // namespace

TEST(Report, Fixed) {
  EXPECT_EQ(fixed(0.15658, 3), "0.157");
  EXPECT_EQ(fixed(-0.0001, 3), "0.000");
  EXPECT_EQ(fixed(89.0, 0), "89");
  EXPECT_EQ(full_precision(0.1), "0.10000000000000001");
}

TEST(Report, FingerprintIgnoresKeyOrder) {
  const json a = json::parse(R"({"a": 1, "b": [1, 2], "c": {"x": 0.5, "y": "z"}})");
  const json b = json::parse(R"({"c": {"y": "z", "x": 0.5}, "b": [1, 2], "a": 1})");
  EXPECT_EQ(fingerprint(a), fingerprint(b));
  EXPECT_EQ(fingerprint(a).size(), 16u);
  EXPECT_NE(fingerprint(a), fingerprint(json{{"a", 2}}));
}

TEST(Report, ResultDocument) {
  const json doc = run_bundled("strategy1-fleming");
  EXPECT_EQ(doc.at("schema"), "choose4/result/v1");
  const auto& prov = doc.at("provenance");
  EXPECT_EQ(prov.at("version"), std::string(engine_version()));
  EXPECT_EQ(prov.at("command"), "ocs");
  EXPECT_EQ(prov.at("config_fingerprint"), fingerprint(bundled_config("strategy1-fleming").document));
  EXPECT_EQ(prov.at("seed"), 20240601u);
  expect_tagged(doc.at("result"), "result");
  const auto& overall = doc.at("result").at("table").at("overall");
  ASSERT_EQ(overall.size(), 1u);
  EXPECT_NEAR(overall[0].at("under_h0").at("value").get<double>(), 0.017, 0.0015);
  EXPECT_EQ(overall[0].at("under_h0").at("source"), "qmc");
}

TEST(Report, MarkdownRows) {
  const auto cfg = parse_config(bundled_config("strategy1-fleming").document);
  const std::string md = render(execute(cfg), OutputFormat::Markdown);
  EXPECT_NE(md.find("| IA1 | **89** | **1.30** | **0.80** | 1.050 | 0.157 | **0.900** | closed-form |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| FA | **178** | **1.30** | **0.80** | 0.969 | **0.025** | 0.900 | closed-form |"),
            std::string::npos);
  EXPECT_NE(md.find("| Overall | - | - | - | - | 0.017 | 0.819 | qmc +/- "), std::string::npos);
  EXPECT_NE(md.find("seed=20240601"), std::string::npos);
}

TEST(Report, RodriguezNotesUnroundedDeaths) {
  const std::string md = render(run_bundled("strategy2-rodriguez"), OutputFormat::Markdown);
  EXPECT_NE(md.find("| IA | 145 |"), std::string::npos) << md;
  EXPECT_NE(md.find("145.32"), std::string::npos);
  EXPECT_NE(md.find("| 0.990 |"), std::string::npos);
}

TEST(Report, CsvColumns) {
  const std::string csv = render(run_bundled("strategy3a-standard-ci"), OutputFormat::Csv);
  std::istringstream in(csv);
  std::string first, header;
  std::getline(in, first);
  std::getline(in, header);
  EXPECT_EQ(first.rfind("# choose4 ", 0), 0u);
  EXPECT_EQ(header, "section,label,quantity,value,display,role,source,std_error");
  std::string line;
  int rows = 0;
  bool fwer = false;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7) << line;
    fwer = fwer || line.find("0.053") != std::string::npos;
  }
  EXPECT_GT(rows, 24);
  EXPECT_TRUE(fwer);
}

TEST(Report, Figure1Csv) {
  json doc{{"schema", "choose4/config/v1"},
           {"command", "figure1"},
           {"figure1", {{"inputs", {{"theta0", 1.3}, {"theta1", 0.8}, {"beta", 0.1}}}, {"d_min", 80}, {"d_max", 90}}}};
  const std::string csv = render(execute(parse_config(doc)), OutputFormat::Csv);
  std::istringstream in(csv);
  std::string first, header;
  std::getline(in, first);
  std::getline(in, header);
  EXPECT_EQ(header,
            "d,theta_star,theta_star_display,discrete_theta_star,discrete_theta_star_display,alpha,alpha_display,"
            "power,power_display,discrete_alpha,discrete_alpha_display,discrete_power,discrete_power_display,"
            "alpha_cap_exceeded,source");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 11);
}

TEST(Report, DocFormatIsJson) {
  const json doc = run_bundled("strategy4-discrete");
  const std::string text = render(doc, OutputFormat::Doc);
  EXPECT_EQ(json::parse(text), doc);
  EXPECT_EQ(text.back(), '\n');
}

TEST(Report, SolveCommand) {
  json doc{{"schema", "choose4/config/v1"},
           {"command", "solve"},
           {"solve", {{"inputs", {{"theta0", 1.3}, {"theta1", 0.8}, {"alpha", 0.05}, {"beta", 0.1}}}}}};
  const json r = execute(parse_config(doc)).at("result");
  EXPECT_NEAR(r.at("resolved").at("d").get<double>(), 145.3237, 1e-3);
  EXPECT_EQ(r.at("solve_route"), "simultaneous-closed-form");
  doc["solve"]["rounding"] = "ceil-integer";
  EXPECT_EQ(execute(parse_config(doc)).at("result").at("resolved").at("d"), 146.0);
}

TEST(Report, SeedOverride) {
  auto doc = bundled_config("strategy1-fleming").document;
  doc["seed"] = 7;
  const json r = execute(parse_config(doc));
  EXPECT_EQ(r.at("provenance").at("seed"), 7u);
  const json base = run_bundled("strategy1-fleming");
  const auto& a = r.at("result").at("table").at("overall")[0].at("under_h0").at("value");
  const auto& b = base.at("result").at("table").at("overall")[0].at("under_h0").at("value");
  EXPECT_NE(a, b);
  EXPECT_NEAR(a.get<double>(), b.get<double>(), 1e-4);
}
