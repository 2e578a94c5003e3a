#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "weakfactor/config.hpp"

using namespace weakfactor;
using nlohmann::json;

TEST_CASE("demo config parses clean") {
  const json doc = demo_config();
  const ParsedConfig parsed = parse_config(doc);
  CHECK(parsed.experiment.replications == 50);
  CHECK(parsed.experiment.dgp_grid.size() == 1);
  CHECK(parsed.experiment.dgp_grid[0].n == 120);
  CHECK(parsed.experiment.targets.size() == 2);
  CHECK(parsed.acceptance.empty());
  CHECK(validate_config(doc).empty());
}

TEST_CASE("unknown keys are rejected everywhere") {
  json doc = demo_config();
  doc["typo_key"] = 1;
  CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("typo_key"),
                       ParseError);
  doc = demo_config();
  doc["grid"][0]["noise"]["alpha"] = 0.5;  // misplaced key
  CHECK_THROWS_AS(parse_config(doc), ParseError);
  doc = demo_config();
  doc["targets"][0]["delta"] = 3;
  CHECK_THROWS_AS(parse_config(doc), ParseError);
}

TEST_CASE("semantic violations surface with their own error types") {
  json doc = demo_config();
  doc["grid"][0]["noise"]["temporal"] = "ar";
  doc["grid"][0]["noise"]["coeffs"] = {1.2};
  CHECK_THROWS_AS(parse_config(doc), NonStationary);

  doc = demo_config();
  doc["grid"][0]["r"] = 150;  // exceeds min(N, T) = 120
  CHECK_THROWS_AS(parse_config(doc), RankTooLarge);

  doc = demo_config();
  doc["targets"][0]["period"] = 130;  // beyond T = 120
  CHECK_THROWS_AS(parse_config(doc), ConfigInvalid);

  doc = demo_config();
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(doc), ParseError);
}

TEST_CASE("validate_config reports instead of throwing") {
  json doc = demo_config();
  doc["grid"][0]["noise"]["temporal"] = "ar";
  doc["grid"][0]["noise"]["coeffs"] = {1.2};
  const auto diagnostics = validate_config(doc);
  REQUIRE(diagnostics.size() == 1);
  CHECK(diagnostics[0].find("NonStationary") != std::string::npos);

  // near-boundary roots warn but stay clean
  doc["grid"][0]["noise"]["coeffs"] = {0.97};
  const auto warnings = validate_config(doc);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].rfind("warning:", 0) == 0);
}

TEST_CASE("overrides") {
  json doc = demo_config();
  apply_override(doc, "replications=7");
  apply_override(doc, "grid.0.n=133");
  apply_override(doc, "grid.0.loadings.alpha=0.25");
  apply_override(doc, "variance_mode=plugin");
  const ParsedConfig parsed = parse_config(doc);
  CHECK(parsed.experiment.replications == 7);
  CHECK(parsed.experiment.dgp_grid[0].n == 133);
  CHECK(parsed.experiment.dgp_grid[0].loading_scheme.alpha == 0.25);
  CHECK(parsed.experiment.variance_mode == VarianceMode::kPlugIn);

  CHECK_THROWS_AS(apply_override(doc, "grid.5.n=10"), ParseError);
  CHECK_THROWS_AS(apply_override(doc, "nonsense"), ParseError);
}

TEST_CASE("acceptance thresholds parse") {
  json doc = demo_config();
  doc["acceptance"] = {
      {"coverage", json::array({{{"target", 0}, {"min", 0.92}, {"max", 0.975}}})},
      {"rate", json::array({{{"target", 1}, {"slope", -0.5}, {"tol", 0.15}}})},
      {"normality", json::array({{{"target", 0}, {"ks_below", 0.0515}}})},
      {"max_flagged_share", 0.01},
  };
  const ParsedConfig parsed = parse_config(doc);
  CHECK(!parsed.acceptance.empty());
  CHECK(parsed.acceptance.coverage.size() == 1);
  CHECK(parsed.acceptance.coverage[0].min == 0.92);
  CHECK(parsed.acceptance.rate[0].tol == 0.15);
  CHECK(parsed.acceptance.normality[0].ks_below == 0.0515);

  doc["acceptance"]["coverage"][0]["target"] = 5;  // out of range
  CHECK_THROWS_AS(parse_config(doc), ParseError);
}

TEST_CASE("noise and loading variants round trip through the parser") {
  json doc = demo_config();
  doc["grid"][0]["noise"] = {{"cross", "block"},    {"block_size", 6},
                             {"rho", 0.3},          {"temporal", "ma"},
                             {"coeffs", {0.5, 0.2}}, {"innovation_sd", 0.9},
                             {"base_sd", 1.1}};
  doc["grid"][0]["loadings"] = {
      {"kind", "heterogeneous_exponents"},
      {"alpha", 0.5},
      {"sigma_lambda", json::array({json::array({2.0})})},
      {"exponent_spread", 0.1}};
  const ParsedConfig parsed = parse_config(doc);
  const auto& desc = parsed.experiment.dgp_grid[0];
  CHECK(desc.noise.cross == CrossKind::kBlockNeighbors);
  CHECK(desc.noise.block_size == 6);
  CHECK(desc.noise.temporal == TemporalKind::kMa);
  CHECK(desc.noise.coeffs.size() == 2);
  CHECK(desc.noise.base_sd == 1.1);
  CHECK(desc.loading_scheme.kind == LoadingKind::kHeterogeneousExponents);
  CHECK(desc.loading_scheme.exponent_spread == 0.1);
}
