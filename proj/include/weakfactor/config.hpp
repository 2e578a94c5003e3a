#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakfactor/mc.hpp"

namespace weakfactor {

/// Embedded pass/fail thresholds evaluated after a run; any failure makes
/// the CLI exit with code 2.
struct AcceptanceThresholds {
  struct CoverageBand {
    int target = 0;
    double min = 0.0;
    double max = 1.0;
  };
  struct RateBand {
    int target = 0;
    double slope = 0.0;
    double tol = 0.0;
  };
  struct NormalityBound {
    int target = 0;
    double ks_below = 1.0;
  };
  std::vector<CoverageBand> coverage;
  std::vector<RateBand> rate;
  std::vector<NormalityBound> normality;
  double max_flagged_share = 1.0;

  bool empty() const {
    return coverage.empty() && rate.empty() && normality.empty() &&
           max_flagged_share >= 1.0;
  }
};

struct ParsedConfig {
  ExperimentConfig experiment;
  AcceptanceThresholds acceptance;
  nlohmann::json resolved;  // fully resolved document echoed into summaries
};

/// Strict schema: versioned, unknown keys are errors. Throws ParseError
/// with key context; semantic violations surface as ConfigInvalid /
/// NonStationary / NotSpd / RankTooLarge etc. from validation.
ParsedConfig parse_config(const nlohmann::json& doc);
ParsedConfig load_config(const std::filesystem::path& path,
                         const std::vector<std::string>& overrides = {});

/// Applies one "dotted.path=value" override to a parsed document; value
/// is interpreted as JSON when possible, else as a string.
void apply_override(nlohmann::json& doc, const std::string& spec);

/// The built-in tiny configuration used by the `demo` subcommand
/// (N = T = 120, 50 replications, one factor and one common target).
nlohmann::json demo_config();

/// Validation pass used by the `validate` subcommand: collects
/// diagnostics instead of stopping at the first problem.
std::vector<std::string> validate_config(const nlohmann::json& doc);

}  // namespace weakfactor
