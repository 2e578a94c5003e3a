#include "weakfactor/config.hpp"

#include <fstream>
#include <set>

namespace weakfactor {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ParseError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

double get_number(const json& obj, const std::string& where,
                  const std::string& key, double fallback,
                  bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ParseError("missing key '" + key + "' in " + where);
    return fallback;
  }
  if (!obj[key].is_number()) {
    throw ParseError("'" + key + "' in " + where + " must be a number");
  }
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& where, const std::string& key,
            int fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ParseError("missing key '" + key + "' in " + where);
    return fallback;
  }
  if (!obj[key].is_number_integer()) {
    throw ParseError("'" + key + "' in " + where + " must be an integer");
  }
  return obj[key].get<int>();
}

MatrixXd parse_matrix(const json& value, const std::string& where) {
  if (!value.is_array() || value.empty()) {
    throw ParseError(where + " must be a non-empty array of rows");
  }
  const size_t rows = value.size();
  if (!value[0].is_array()) {
    throw ParseError(where + " rows must be arrays");
  }
  const size_t cols = value[0].size();
  MatrixXd m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!value[i].is_array() || value[i].size() != cols) {
      throw ParseError(where + " is ragged at row " + std::to_string(i));
    }
    for (size_t j = 0; j < cols; ++j) {
      if (!value[i][j].is_number()) {
        throw ParseError(where + " entries must be numbers");
      }
      m(static_cast<Index>(i), static_cast<Index>(j)) =
          value[i][j].get<double>();
    }
  }
  return m;
}

VectorXd parse_vector(const json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + " must be an array");
  VectorXd v(value.size());
  for (size_t k = 0; k < value.size(); ++k) {
    if (!value[k].is_number()) {
      throw ParseError(where + " entries must be numbers");
    }
    v(static_cast<Index>(k)) = value[k].get<double>();
  }
  return v;
}

LoadingScheme parse_loadings(const json& obj, const std::string& where) {
  require_keys(obj, where,
               {"kind", "alpha", "sigma_lambda", "exponent_spread"});
  LoadingScheme scheme;
  const std::string kind = obj.value("kind", "homogeneous");
  if (kind == "homogeneous") {
    scheme.kind = LoadingKind::kHomogeneous;
  } else if (kind == "sparse_strong") {
    scheme.kind = LoadingKind::kSparseStrong;
  } else if (kind == "heterogeneous_exponents") {
    scheme.kind = LoadingKind::kHeterogeneousExponents;
  } else {
    throw ParseError("unknown loading kind '" + kind + "' in " + where);
  }
  scheme.alpha = get_number(obj, where, "alpha", 1.0, /*required=*/true);
  if (!obj.contains("sigma_lambda")) {
    throw ParseError("missing key 'sigma_lambda' in " + where);
  }
  scheme.sigma_lambda = parse_matrix(obj["sigma_lambda"], where + ".sigma_lambda");
  scheme.exponent_spread = get_number(obj, where, "exponent_spread", 0.0);
  return scheme;
}

NoiseSpec parse_noise(const json& obj, const std::string& where) {
  require_keys(obj, where,
               {"cross", "block_size", "rho", "temporal", "coeffs",
                "innovation_sd", "base_sd"});
  NoiseSpec spec;
  const std::string cross = obj.value("cross", "independent");
  if (cross == "independent") {
    spec.cross = CrossKind::kIndependent;
  } else if (cross == "block") {
    spec.cross = CrossKind::kBlockNeighbors;
    spec.block_size = get_int(obj, where, "block_size", 1, /*required=*/true);
    spec.rho = get_number(obj, where, "rho", 0.0, /*required=*/true);
  } else {
    throw ParseError("unknown cross kind '" + cross + "' in " + where);
  }
  const std::string temporal = obj.value("temporal", "independent");
  if (temporal == "independent") {
    spec.temporal = TemporalKind::kIndependent;
  } else if (temporal == "ar" || temporal == "ma") {
    spec.temporal = temporal == "ar" ? TemporalKind::kAr : TemporalKind::kMa;
    if (!obj.contains("coeffs")) {
      throw ParseError("missing key 'coeffs' in " + where);
    }
    spec.coeffs = parse_vector(obj["coeffs"], where + ".coeffs");
    spec.innovation_sd = get_number(obj, where, "innovation_sd", 1.0);
  } else {
    throw ParseError("unknown temporal kind '" + temporal + "' in " + where);
  }
  spec.base_sd = get_number(obj, where, "base_sd", 1.0);
  return spec;
}

DgpDescriptor parse_grid_point(const json& obj, const std::string& where) {
  require_keys(obj, where, {"n", "t", "r", "loadings", "factor_cov", "noise"});
  DgpDescriptor desc;
  desc.n = get_int(obj, where, "n", 0, /*required=*/true);
  desc.t = get_int(obj, where, "t", 0, /*required=*/true);
  desc.r = get_int(obj, where, "r", 0, /*required=*/true);
  if (!obj.contains("loadings")) {
    throw ParseError("missing key 'loadings' in " + where);
  }
  desc.loading_scheme = parse_loadings(obj["loadings"], where + ".loadings");
  if (!obj.contains("factor_cov")) {
    throw ParseError("missing key 'factor_cov' in " + where);
  }
  desc.factor_cov = parse_matrix(obj["factor_cov"], where + ".factor_cov");
  if (!obj.contains("noise")) {
    throw ParseError("missing key 'noise' in " + where);
  }
  desc.noise = parse_noise(obj["noise"], where + ".noise");
  return desc;
}

TargetSpec parse_target(const json& obj, const std::string& where) {
  require_keys(obj, where, {"kind", "unit", "period"});
  TargetSpec spec;
  const std::string kind = obj.value("kind", "");
  if (kind == "loading") {
    spec.kind = TargetSpec::Kind::kLoading;
  } else if (kind == "factor") {
    spec.kind = TargetSpec::Kind::kFactor;
  } else if (kind == "common") {
    spec.kind = TargetSpec::Kind::kCommon;
  } else {
    throw ParseError("unknown target kind '" + kind + "' in " + where);
  }
  spec.unit = get_int(obj, where, "unit", -1);
  spec.period = get_int(obj, where, "period", -1);
  return spec;
}

AcceptanceThresholds parse_acceptance(const json& obj,
                                      const std::string& where) {
  require_keys(obj, where, {"coverage", "rate", "normality",
                            "max_flagged_share"});
  AcceptanceThresholds acc;
  if (obj.contains("coverage")) {
    for (size_t k = 0; k < obj["coverage"].size(); ++k) {
      const auto& band = obj["coverage"][k];
      const std::string ctx = where + ".coverage[" + std::to_string(k) + "]";
      require_keys(band, ctx, {"target", "min", "max"});
      acc.coverage.push_back({get_int(band, ctx, "target", 0),
                              get_number(band, ctx, "min", 0.0, true),
                              get_number(band, ctx, "max", 1.0, true)});
    }
  }
  if (obj.contains("rate")) {
    for (size_t k = 0; k < obj["rate"].size(); ++k) {
      const auto& band = obj["rate"][k];
      const std::string ctx = where + ".rate[" + std::to_string(k) + "]";
      require_keys(band, ctx, {"target", "slope", "tol"});
      acc.rate.push_back({get_int(band, ctx, "target", 0),
                          get_number(band, ctx, "slope", 0.0, true),
                          get_number(band, ctx, "tol", 0.0, true)});
    }
  }
  if (obj.contains("normality")) {
    for (size_t k = 0; k < obj["normality"].size(); ++k) {
      const auto& bound = obj["normality"][k];
      const std::string ctx = where + ".normality[" + std::to_string(k) + "]";
      require_keys(bound, ctx, {"target", "ks_below"});
      acc.normality.push_back({get_int(bound, ctx, "target", 0),
                               get_number(bound, ctx, "ks_below", 1.0, true)});
    }
  }
  acc.max_flagged_share = get_number(obj, where, "max_flagged_share", 1.0);
  return acc;
}

}  // namespace

ParsedConfig parse_config(const json& doc) {
  require_keys(doc, "config",
               {"schema_version", "base_seed", "replications", "ci_level",
                "variance_mode", "bandwidth", "targets", "diagnostics", "grid",
                "acceptance"});
  const int version = get_int(doc, "config", "schema_version", 0, true);
  if (version != 1) {
    throw ParseError("unsupported schema_version " + std::to_string(version));
  }

  ParsedConfig parsed;
  ExperimentConfig& cfg = parsed.experiment;
  if (!doc.contains("base_seed") || !doc["base_seed"].is_number_integer() ||
      (doc["base_seed"].is_number_integer() &&
       !doc["base_seed"].is_number_unsigned() &&
       doc["base_seed"].get<std::int64_t>() < 0)) {
    throw ParseError("'base_seed' must be a nonnegative integer");
  }
  cfg.base_seed = doc["base_seed"].get<std::uint64_t>();
  cfg.replications = get_int(doc, "config", "replications", 0, true);
  cfg.ci_level = get_number(doc, "config", "ci_level", 0.95);

  if (doc.contains("variance_mode")) {
    const std::string mode = doc["variance_mode"].get<std::string>();
    if (mode == "oracle") {
      cfg.variance_mode = VarianceMode::kOracle;
    } else if (mode == "plugin") {
      cfg.variance_mode = VarianceMode::kPlugIn;
    } else {
      throw ParseError("unknown variance_mode '" + mode + "'");
    }
  }
  if (doc.contains("bandwidth")) {
    if (doc["bandwidth"].is_string()) {
      if (doc["bandwidth"].get<std::string>() != "auto") {
        throw ParseError("'bandwidth' must be \"auto\" or an integer >= 0");
      }
      cfg.bandwidth = -1;
    } else {
      cfg.bandwidth = get_int(doc, "config", "bandwidth", -1);
      if (cfg.bandwidth < 0) throw ParseError("'bandwidth' must be >= 0");
    }
  }

  if (!doc.contains("targets")) throw ParseError("missing key 'targets'");
  for (size_t k = 0; k < doc["targets"].size(); ++k) {
    cfg.targets.push_back(parse_target(doc["targets"][k],
                                       "targets[" + std::to_string(k) + "]"));
  }

  if (doc.contains("diagnostics")) {
    const auto& diag = doc["diagnostics"];
    require_keys(diag, "diagnostics", {"identities", "leaveout", "delta"});
    if (diag.contains("identities")) {
      cfg.diagnostics.identities = diag["identities"].get<bool>();
    }
    if (diag.contains("leaveout")) {
      cfg.diagnostics.leaveout = diag["leaveout"].get<bool>();
    }
    if (diag.contains("delta")) {
      if (diag["delta"].is_string()) {
        if (diag["delta"].get<std::string>() != "auto") {
          throw ParseError("'diagnostics.delta' must be \"auto\" or an integer");
        }
        cfg.diagnostics.delta = -1;
      } else {
        cfg.diagnostics.delta = get_int(diag, "diagnostics", "delta", -1);
      }
    }
  }

  if (!doc.contains("grid")) throw ParseError("missing key 'grid'");
  for (size_t k = 0; k < doc["grid"].size(); ++k) {
    cfg.dgp_grid.push_back(
        parse_grid_point(doc["grid"][k], "grid[" + std::to_string(k) + "]"));
  }

  if (doc.contains("acceptance")) {
    parsed.acceptance = parse_acceptance(doc["acceptance"], "acceptance");
  }

  cfg.validate();
  for (const auto& band : parsed.acceptance.coverage) {
    if (band.target < 0 || band.target >= static_cast<int>(cfg.targets.size()))
      throw ParseError("acceptance coverage target out of range");
  }
  for (const auto& band : parsed.acceptance.rate) {
    if (band.target < 0 || band.target >= static_cast<int>(cfg.targets.size()))
      throw ParseError("acceptance rate target out of range");
  }
  for (const auto& bound : parsed.acceptance.normality) {
    if (bound.target < 0 ||
        bound.target >= static_cast<int>(cfg.targets.size()))
      throw ParseError("acceptance normality target out of range");
  }
  parsed.resolved = doc;
  return parsed;
}

void apply_override(json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    throw ParseError("override must look like key=value, got '" + spec + "'");
  }
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json* node = &doc;
  std::string token;
  std::vector<std::string> tokens;
  for (char ch : path) {
    if (ch == '.') {
      tokens.push_back(token);
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  tokens.push_back(token);
  for (size_t k = 0; k + 1 < tokens.size(); ++k) {
    const std::string& part = tokens[k];
    if (node->is_array()) {
      const size_t idx = std::stoul(part);
      if (idx >= node->size()) {
        throw ParseError("override index out of range: " + path);
      }
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else {
      throw ParseError("override path not found: " + path);
    }
  }
  const std::string& leaf = tokens.back();
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;  // plain string
  if (node->is_array()) {
    const size_t idx = std::stoul(leaf);
    if (idx >= node->size()) {
      throw ParseError("override index out of range: " + path);
    }
    (*node)[idx] = value;
  } else {
    (*node)[leaf] = value;
  }
}

ParsedConfig load_config(const std::filesystem::path& path,
                         const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path.string());
  json doc = json::parse(is, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw ParseError("config is not valid JSON: " + path.string());
  }
  for (const auto& spec : overrides) apply_override(doc, spec);
  return parse_config(doc);
}

json demo_config() {
  return json{
      {"schema_version", 1},
      {"base_seed", 20240817},
      {"replications", 50},
      {"ci_level", 0.95},
      {"variance_mode", "oracle"},
      {"targets",
       json::array({{{"kind", "factor"}}, {{"kind", "common"}}})},
      {"diagnostics", {{"identities", true}}},
      {"grid", json::array({{{"n", 120},
                             {"t", 120},
                             {"r", 1},
                             {"loadings",
                              {{"kind", "homogeneous"},
                               {"alpha", 0.5},
                               {"sigma_lambda", json::array({json::array({1.0})})}}},
                             {"factor_cov", json::array({json::array({1.0})})},
                             {"noise",
                              {{"cross", "independent"},
                               {"temporal", "independent"},
                               {"base_sd", 1.0}}}}})},
  };
}

std::vector<std::string> validate_config(const json& doc) {
  std::vector<std::string> diagnostics;
  ParsedConfig parsed;
  try {
    parsed = parse_config(doc);
  } catch (const Error& e) {
    diagnostics.push_back(e.what());
    return diagnostics;
  }
  // parse_config already ran full semantic validation; surface soft
  // warnings that are not errors
  for (size_t g = 0; g < parsed.experiment.dgp_grid.size(); ++g) {
    const auto& desc = parsed.experiment.dgp_grid[g];
    const double root = desc.noise.max_ar_root();
    if (root > 0.95) {
      diagnostics.push_back("warning: grid[" + std::to_string(g) +
                            "] AR root modulus " + std::to_string(root) +
                            " is close to the stationarity bound");
    }
  }
  return diagnostics;
}

}  // namespace weakfactor
