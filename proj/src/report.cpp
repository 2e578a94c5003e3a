#include "weakfactor/report.hpp"

#include <cmath>
#include <fstream>

#include "weakfactor/panel_io.hpp"

namespace weakfactor {

using nlohmann::json;

namespace {

const char* kCsvHeader =
    "grid_id,rep_id,seed,n,t,r,alpha,target,unit,period,valid,flag,"
    "err,bn_err,dim,hits,stud_first,stud_norm,variance_mode,"
    "loo_kind,loo_index,gap_max,gap_rotation_loading,gap_rotation_factor,"
    "gap_matching_loading,gap_matching_factor,gap_symmetric,gap_balanced_truth,"
    "gap_balanced_fit,gap_ydecomp,gap_decomp_r1,gap_hbn,"
    "first_order_norm,r1_norm,r2_norm,delta1_norm,delta2_norm,"
    "nbr_period,nbr_delta,nbr_delta1_norm";

const char* target_name(TargetSpec::Kind kind) {
  switch (kind) {
    case TargetSpec::Kind::kLoading:
      return "loading";
    case TargetSpec::Kind::kFactor:
      return "factor";
    case TargetSpec::Kind::kCommon:
      return "common";
  }
  return "?";
}

void append_gap_fields(std::ostream& os, const ReplicationRecord& record) {
  if (!record.has_diagnostics) {
    for (int k = 0; k < 18; ++k) os << ',';
    return;
  }
  const IdentityGaps& g = record.diagnostics.gaps;
  os << ",unit," << record.loo_unit << ',' << format_double(g.max_gap()) << ','
     << format_double(g.rotation_loading) << ','
     << format_double(g.rotation_factor) << ','
     << format_double(g.matching_loading) << ','
     << format_double(g.matching_factor) << ','
     << format_double(g.claim_symmetric) << ','
     << format_double(g.balanced_truth) << ','
     << format_double(g.balanced_fit) << ','
     << format_double(g.ydecomposition) << ','
     << format_double(g.decomp_r1) << ',' << format_double(g.hbn) << ','
     << format_double(record.diagnostics.first_order_norm) << ','
     << format_double(record.diagnostics.r1_norm) << ','
     << format_double(record.diagnostics.r2_norm) << ','
     << format_double(record.diagnostics.delta1_norm) << ','
     << format_double(record.diagnostics.delta2_norm);
}

void append_neighbor_fields(std::ostream& os,
                            const ReplicationRecord& record) {
  if (!record.has_neighbor_diag) {
    os << ",,,";
    return;
  }
  os << ',' << record.nbr_period << ',' << record.nbr_delta << ','
     << format_double(record.nbr_delta1_norm);
}

}  // namespace

void write_records_csv(const std::filesystem::path& path,
                       const ExperimentConfig& cfg,
                       const std::vector<ReplicationRecord>& records) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << kCsvHeader << '\n';
  for (const auto& record : records) {
    const DgpDescriptor& desc =
        cfg.dgp_grid[static_cast<size_t>(record.grid_id)];
    const size_t n_targets = cfg.targets.size();
    for (size_t k = 0; k < n_targets; ++k) {
      os << record.grid_id << ',' << record.rep_id << ',' << record.seed << ','
         << desc.n << ',' << desc.t << ',' << desc.r << ','
         << format_double(desc.loading_scheme.alpha) << ',';
      if (record.valid && k < record.targets.size()) {
        const TargetResult& target = record.targets[k];
        os << target_name(target.kind) << ',' << target.unit << ','
           << target.period << ",1,," << format_double(target.err) << ','
           << format_double(target.bn_err) << ',' << target.dim << ','
           << target.hits << ',' << format_double(target.studentized(0)) << ','
           << format_double(target.studentized.norm()) << ','
           << target.variance_mode_effective;
      } else {
        // flagged, never dropped
        os << target_name(cfg.targets[k].kind) << ',' << cfg.targets[k].unit
           << ',' << cfg.targets[k].period << ",0," << record.flag
           << ",,,,,,,";
      }
      append_gap_fields(os, record);
      append_neighbor_fields(os, record);
      os << '\n';
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

RunSummary summarize(const ParsedConfig& parsed,
                     const std::vector<ReplicationRecord>& records,
                     double wall_seconds, int threads) {
  const ExperimentConfig& cfg = parsed.experiment;
  RunSummary summary;
  json& doc = summary.document;
  doc["schema_version"] = 1;
  doc["library"] = "weakfactor 1.0.0";
  doc["config"] = parsed.resolved;
  doc["threads"] = threads;
  doc["wall_seconds"] = wall_seconds;

  int flagged = 0;
  json flags = json::object();
  for (const auto& record : records) {
    if (!record.valid) {
      ++flagged;
      const std::string key = record.flag.empty() ? "unknown" : record.flag;
      flags[key] = flags.value(key, 0) + 1;
    }
  }
  doc["replications"] = json{{"total", records.size()},
                             {"flagged", flagged},
                             {"flag_counts", flags}};

  json per_grid = json::array();
  for (int g = 0; g < static_cast<int>(cfg.dgp_grid.size()); ++g) {
    const auto& desc = cfg.dgp_grid[static_cast<size_t>(g)];
    json entry{{"grid_id", g}, {"n", desc.n}, {"t", desc.t}, {"r", desc.r}};
    json targets = json::array();
    for (int k = 0; k < static_cast<int>(cfg.targets.size()); ++k) {
      json tgt{{"index", k},
               {"kind", target_name(cfg.targets[static_cast<size_t>(k)].kind)}};
      std::vector<double> errs;
      for (const auto& record : records) {
        if (record.grid_id != g || !record.valid) continue;
        errs.push_back(record.targets[static_cast<size_t>(k)].err);
      }
      if (!errs.empty()) tgt["median_err"] = median(errs);
      try {
        const CoverageStats cov = coverage_stats(records, k, g);
        tgt["coverage"] = cov.coverage;
        tgt["coverage_se"] = cov.se;
        tgt["coverage_n"] = cov.n;
      } catch (const TooFewRecords&) {
      }
      targets.push_back(std::move(tgt));
    }
    entry["targets"] = std::move(targets);
    per_grid.push_back(std::move(entry));
  }
  doc["grids"] = std::move(per_grid);

  json rates = json::array();
  if (cfg.dgp_grid.size() >= 3) {
    for (int k = 0; k < static_cast<int>(cfg.targets.size()); ++k) {
      try {
        const RateResult rate = rate_regression(records, cfg, k);
        rates.push_back(json{{"target", k},
                             {"slope", rate.fit.slope},
                             {"stderr", rate.fit.stderr_slope},
                             {"intercept", rate.fit.intercept}});
      } catch (const Error&) {
      }
    }
  }
  doc["rates"] = std::move(rates);
  if (cfg.dgp_grid.size() >= 3) {
    doc["rates_note"] =
        "log-log slopes are meaningful only when a single rate term "
        "dominates over the whole grid; mixed-term configurations are not "
        "slope-testable";
  }

  json normality = json::array();
  for (int k = 0; k < static_cast<int>(cfg.targets.size()); ++k) {
    try {
      const NormalityReport rep = normality_check(pooled_studentized(records, k));
      normality.push_back(json{{"target", k},
                               {"ks_stat", rep.ks_stat},
                               {"skew", rep.skew},
                               {"excess_kurtosis", rep.excess_kurtosis},
                               {"n", rep.n}});
    } catch (const TooFewDraws&) {
    }
  }
  doc["normality"] = std::move(normality);

  if (cfg.variance_mode == VarianceMode::kPlugIn) {
    // the spec defines a feasible plug-in for loadings only; other
    // targets fall back to oracle variances
    bool fallback = false;
    for (const auto& target : cfg.targets) {
      fallback |= target.kind != TargetSpec::Kind::kLoading;
    }
    doc["variance_mode_note"] =
        fallback ? "plugin applies to loading targets; others use oracle"
                 : "plugin";
  }

  // embedded acceptance thresholds
  json checks = json::array();
  bool all_pass = true;
  const AcceptanceThresholds& acc = parsed.acceptance;
  for (const auto& band : acc.coverage) {
    json check{{"kind", "coverage"}, {"target", band.target}};
    try {
      const CoverageStats cov = coverage_stats(records, band.target);
      const bool pass = cov.coverage >= band.min && cov.coverage <= band.max;
      check["value"] = cov.coverage;
      check["pass"] = pass;
      all_pass &= pass;
    } catch (const Error& e) {
      check["error"] = e.what();
      check["pass"] = false;
      all_pass = false;
    }
    checks.push_back(std::move(check));
  }
  for (const auto& band : acc.rate) {
    json check{{"kind", "rate"}, {"target", band.target}};
    try {
      const RateResult rate = rate_regression(records, cfg, band.target);
      const bool pass = std::abs(rate.fit.slope - band.slope) <= band.tol;
      check["value"] = rate.fit.slope;
      check["pass"] = pass;
      all_pass &= pass;
    } catch (const Error& e) {
      check["error"] = e.what();
      check["pass"] = false;
      all_pass = false;
    }
    checks.push_back(std::move(check));
  }
  for (const auto& bound : acc.normality) {
    json check{{"kind", "normality"}, {"target", bound.target}};
    try {
      const NormalityReport rep =
          normality_check(pooled_studentized(records, bound.target));
      const bool pass = rep.ks_stat < bound.ks_below;
      check["value"] = rep.ks_stat;
      check["pass"] = pass;
      all_pass &= pass;
    } catch (const Error& e) {
      check["error"] = e.what();
      check["pass"] = false;
      all_pass = false;
    }
    checks.push_back(std::move(check));
  }
  if (acc.max_flagged_share < 1.0) {
    const double share =
        records.empty() ? 0.0
                        : static_cast<double>(flagged) / records.size();
    const bool pass = share <= acc.max_flagged_share;
    checks.push_back(json{
        {"kind", "flagged_share"}, {"value", share}, {"pass", pass}});
    all_pass &= pass;
  }
  doc["acceptance"] = std::move(checks);
  summary.acceptance_passed = all_pass;
  return summary;
}

void write_summary_json(const std::filesystem::path& path,
                        const RunSummary& summary) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << summary.document.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

namespace {

void write_svg_line_plot(const std::filesystem::path& path,
                         const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::string& title) {
  const double width = 480, height = 320, margin = 48;
  double x_lo = xs.front(), x_hi = xs.front();
  double y_lo = ys.front(), y_hi = ys.front();
  for (double x : xs) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
  }
  for (double y : ys) {
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;
  auto px = [&](double x) {
    return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  };
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
     << "' height='" << height << "'>\n"
     << "<rect width='100%' height='100%' fill='white'/>\n"
     << "<text x='" << width / 2 << "' y='20' text-anchor='middle'>" << title
     << "</text>\n<polyline fill='none' stroke='steelblue' stroke-width='2' points='";
  for (size_t k = 0; k < xs.size(); ++k) {
    os << px(xs[k]) << ',' << py(ys[k]) << ' ';
  }
  os << "'/>\n";
  for (size_t k = 0; k < xs.size(); ++k) {
    os << "<circle cx='" << px(xs[k]) << "' cy='" << py(ys[k])
       << "' r='3' fill='steelblue'/>\n";
  }
  os << "</svg>\n";
}

}  // namespace

void write_plot_data(const std::filesystem::path& plots_dir,
                     const ExperimentConfig& cfg,
                     const std::vector<ReplicationRecord>& records,
                     bool render_svg) {
  std::filesystem::create_directories(plots_dir);
  for (int k = 0; k < static_cast<int>(cfg.targets.size()); ++k) {
    std::vector<double> ns, medians;
    for (int g = 0; g < static_cast<int>(cfg.dgp_grid.size()); ++g) {
      std::vector<double> errs;
      for (const auto& record : records) {
        if (record.grid_id != g || !record.valid) continue;
        errs.push_back(record.targets[static_cast<size_t>(k)].err);
      }
      if (errs.empty()) continue;
      ns.push_back(static_cast<double>(
          cfg.dgp_grid[static_cast<size_t>(g)].n));
      medians.push_back(median(std::move(errs)));
    }
    const std::string base = "err_vs_n_target" + std::to_string(k);
    std::ofstream os(plots_dir / (base + ".csv"));
    if (!os) throw IoError("cannot write plot data");
    os << "n,median_err\n";
    for (size_t i = 0; i < ns.size(); ++i) {
      os << format_double(ns[i]) << ',' << format_double(medians[i]) << '\n';
    }
    if (render_svg && ns.size() >= 2) {
      write_svg_line_plot(plots_dir / (base + ".svg"), ns, medians,
                          std::string("median error vs N (") +
                              target_name(cfg.targets[static_cast<size_t>(k)].kind) +
                              ")");
    }
  }
}

}  // namespace weakfactor
