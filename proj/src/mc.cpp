#include "weakfactor/mc.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace weakfactor {

void ExperimentConfig::validate() const {
  if (replications < 1) throw ConfigInvalid("replications must be positive");
  if (dgp_grid.empty()) throw ConfigInvalid("grid must not be empty");
  if (targets.empty()) throw ConfigInvalid("at least one target is required");
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw ConfigInvalid("ci_level must lie in (0,1)");
  }
  for (const auto& desc : dgp_grid) desc.validate();
  for (const auto& target : targets) {
    for (const auto& desc : dgp_grid) {
      if (target.unit >= desc.n) {
        throw ConfigInvalid("target unit " + std::to_string(target.unit) +
                            " does not resolve within n = " +
                            std::to_string(desc.n));
      }
      if (target.period >= desc.t) {
        throw ConfigInvalid("target period " + std::to_string(target.period) +
                            " does not resolve within t = " +
                            std::to_string(desc.t));
      }
    }
  }
}

int ExperimentConfig::resolve_bandwidth(const DgpDescriptor& desc) const {
  if (bandwidth >= 0) return bandwidth;
  if (desc.noise.temporal == TemporalKind::kIndependent) return 0;
  return static_cast<int>(
      std::ceil(std::cbrt(static_cast<double>(desc.t)) - 1e-9));
}

int ExperimentConfig::resolve_delta(const DgpDescriptor& desc) const {
  if (diagnostics.delta >= 0) return diagnostics.delta;
  switch (desc.noise.temporal) {
    case TemporalKind::kMa:
      return static_cast<int>(desc.noise.coeffs.size());
    case TemporalKind::kAr:
      return static_cast<int>(
          std::ceil(std::log(static_cast<double>(desc.n)) - 1e-9));
    case TemporalKind::kIndependent:
      return 0;
  }
  return 0;
}

namespace {

struct ResolvedTarget {
  TargetSpec::Kind kind;
  int unit;
  int period;
};

ResolvedTarget resolve_target(const TargetSpec& spec,
                              const DgpDescriptor& desc) {
  ResolvedTarget out{spec.kind, spec.unit, spec.period};
  if (out.unit < 0) out.unit = desc.n / 2;
  if (out.period < 0) out.period = desc.t / 2;
  return out;
}

}  // namespace

ReplicationRecord run_single_replication(const ExperimentConfig& cfg,
                                         int grid_id, int rep_id) {
  ReplicationRecord record;
  record.grid_id = grid_id;
  record.rep_id = rep_id;

  DgpDescriptor desc = cfg.dgp_grid[static_cast<size_t>(grid_id)];
  desc.seed = RngStream::derive_seed(cfg.base_seed,
                                     static_cast<std::uint64_t>(grid_id) + 1,
                                     static_cast<std::uint64_t>(rep_id) + 1);
  record.seed = desc.seed;

  const auto started = std::chrono::steady_clock::now();
  try {
    const PanelInstance inst = assemble_panel(desc);
    const PcFit fit = pc_fit(inst.panel.values, desc.r);
    const TruthOracle oracle = TruthOracle::from(inst.truth);
    const Alignment al = align(fit, inst.truth, oracle);
    const ErrorReport errs = rotated_errors(fit, inst.truth, al);
    const double n_alpha =
        std::pow(static_cast<double>(desc.n), inst.truth.alpha);

    // degenerate (noiseless) covariances keep their zero-width intervals
    // instead of failing the whole replication
    auto make_ci = [&cfg](const VectorXd& center, const MatrixXd& cov,
                          const VectorXd& truth_value) {
      try {
        return confidence_interval(center, cov, truth_value, cfg.ci_level);
      } catch (const SingularCovariance&) {
        ConfidenceReport ci;
        ci.center = center;
        ci.covariance = cov;
        ci.level = cfg.ci_level;
        ci.interval_hits =
            wald_interval_hits(center, cov, truth_value, cfg.ci_level);
        ci.studentized = VectorXd::Zero(center.size());
        return ci;
      }
    };

    for (const auto& spec : cfg.targets) {
      const ResolvedTarget target = resolve_target(spec, desc);
      TargetResult result;
      result.kind = target.kind;
      result.unit = target.unit;
      result.period = target.period;
      result.variance_mode_effective = "oracle";

      const AsymptoticObjects obj =
          oracle_objects(desc, inst.truth, target.unit, target.period);

      switch (target.kind) {
        case TargetSpec::Kind::kLoading: {
          result.err = errs.per_unit_loading(target.unit);
          result.bn_err = errs.bn_loading(target.unit);
          MatrixXd cov;
          if (cfg.variance_mode == VarianceMode::kPlugIn) {
            cov = plugin_avar_loading(fit, inst.panel.values, target.unit,
                                      cfg.resolve_bandwidth(desc)) /
                  static_cast<double>(desc.t);
            result.variance_mode_effective = "plugin";
          } else {
            cov = avar_loading(obj) / static_cast<double>(desc.t);
          }
          const VectorXd center =
              fit.loadings_hat.row(target.unit).transpose();
          const VectorXd rotated_truth =
              (inst.truth.loadings.row(target.unit) * al.h_inv.transpose())
                  .transpose();
          const ConfidenceReport ci = make_ci(center, cov, rotated_truth);
          result.dim = desc.r;
          for (bool hit : ci.interval_hits) result.hits += hit ? 1 : 0;
          result.studentized = ci.studentized;
          break;
        }
        case TargetSpec::Kind::kFactor: {
          result.err = errs.per_period_factor(target.period);
          const MatrixXd cov = avar_factor(obj) / n_alpha;
          const VectorXd center =
              fit.factors_hat.row(target.period).transpose();
          const VectorXd rotated_truth =
              (inst.truth.factors.row(target.period) * al.h).transpose();
          const ConfidenceReport ci = make_ci(center, cov, rotated_truth);
          result.dim = desc.r;
          for (bool hit : ci.interval_hits) result.hits += hit ? 1 : 0;
          result.studentized = ci.studentized;
          break;
        }
        case TargetSpec::Kind::kCommon: {
          result.err = errs.common_abs(target.unit, target.period);
          const double v =
              var_common(inst.truth, obj, target.unit, target.period);
          VectorXd center(1), truth_value(1);
          center(0) = fit.loadings_hat.row(target.unit)
                          .dot(fit.factors_hat.row(target.period));
          truth_value(0) = inst.truth.common(target.unit, target.period);
          MatrixXd cov(1, 1);
          cov(0, 0) = v;
          const ConfidenceReport ci = make_ci(center, cov, truth_value);
          result.dim = 1;
          result.hits = ci.interval_hits[0] ? 1 : 0;
          result.studentized = ci.studentized;
          break;
        }
      }
      record.targets.push_back(std::move(result));
    }

    if (cfg.diagnostics.identities) {
      record.loo_unit = desc.n / 2;
      record.diagnostics =
          run_identity_suite(inst, fit, oracle, al, record.loo_unit);
      record.has_diagnostics = true;
      if (record.diagnostics.gaps.max_gap() >= 1e-8) {
        record.valid = false;
        record.flag = "IdentityGap";
      }
    }
    if (cfg.diagnostics.leaveout) {
      record.nbr_period = desc.t / 2;
      record.nbr_delta = cfg.resolve_delta(desc);
      const LeaveOutPanel nbr =
          leave_neighbor_out(inst.panel.values, inst.truth, record.nbr_period,
                             record.nbr_delta, desc.r, oracle);
      record.nbr_delta1_norm = period_delta1(nbr, oracle).norm();
      record.has_neighbor_diag = true;
    }
  } catch (const Error& e) {
    record.valid = false;
    record.flag = e.name();
    record.targets.clear();
  } catch (const std::exception& e) {
    record.valid = false;
    record.flag = "Unexpected";
    record.targets.clear();
  }
  record.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return record;
}

std::vector<ReplicationRecord> run_experiment(const ExperimentConfig& cfg,
                                              int threads,
                                              const GridProgressFn& on_grid_done) {
  cfg.validate();
  const int n_grid = static_cast<int>(cfg.dgp_grid.size());
  std::vector<ReplicationRecord> records(
      static_cast<size_t>(n_grid) * static_cast<size_t>(cfg.replications));

  threads = std::max(1, threads);
  for (int grid_id = 0; grid_id < n_grid; ++grid_id) {
    const auto started = std::chrono::steady_clock::now();
    const size_t base = static_cast<size_t>(grid_id) *
                        static_cast<size_t>(cfg.replications);
    std::atomic<int> next{0};
    auto worker = [&]() {
      while (true) {
        const int rep_id = next.fetch_add(1);
        if (rep_id >= cfg.replications) break;
        records[base + static_cast<size_t>(rep_id)] =
            run_single_replication(cfg, grid_id, rep_id);
      }
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(threads));
      for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (on_grid_done) {
      on_grid_done(grid_id,
                   std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - started)
                       .count());
    }
  }
  return records;
}

CoverageStats coverage_stats(const std::vector<ReplicationRecord>& records,
                             int target_index, std::optional<int> grid_id) {
  int hits = 0;
  int trials = 0;
  int valid_records = 0;
  for (const auto& record : records) {
    if (grid_id && record.grid_id != *grid_id) continue;
    if (!record.valid) continue;
    const auto& target = record.targets.at(static_cast<size_t>(target_index));
    hits += target.hits;
    trials += target.dim;
    ++valid_records;
  }
  if (valid_records < 30) {
    throw TooFewRecords("coverage needs at least 30 valid records, got " +
                        std::to_string(valid_records));
  }
  CoverageStats stats;
  stats.n = trials;
  stats.coverage = static_cast<double>(hits) / trials;
  stats.se = std::sqrt(stats.coverage * (1.0 - stats.coverage) / trials);
  return stats;
}

RateResult rate_regression(const std::vector<ReplicationRecord>& records,
                           const ExperimentConfig& cfg, int target_index,
                           RateStatistic stat) {
  RateResult out;
  for (int g = 0; g < static_cast<int>(cfg.dgp_grid.size()); ++g) {
    std::vector<double> values;
    for (const auto& record : records) {
      if (record.grid_id != g || !record.valid) continue;
      const auto& target =
          record.targets.at(static_cast<size_t>(target_index));
      switch (stat) {
        case RateStatistic::kError:
          values.push_back(target.err);
          break;
        case RateStatistic::kBnError:
          values.push_back(target.bn_err);
          break;
        case RateStatistic::kStudentizedNorm:
          values.push_back(target.studentized.norm());
          break;
      }
    }
    if (values.size() < 30) {
      throw TooFewGridPoints("grid point " + std::to_string(g) +
                             " has fewer than 30 valid records");
    }
    out.log_n.push_back(std::log(static_cast<double>(
        cfg.dgp_grid[static_cast<size_t>(g)].n)));
    out.log_median.push_back(std::log(median(std::move(values))));
  }
  if (out.log_n.size() < 3) {
    throw TooFewGridPoints("rate regression needs at least 3 grid points");
  }
  out.fit = least_squares(out.log_n, out.log_median);
  return out;
}

NormalityReport normality_check(const std::vector<double>& draws) {
  if (draws.size() < 500) {
    throw TooFewDraws("normality check needs at least 500 draws, got " +
                      std::to_string(draws.size()));
  }
  NormalityReport report;
  report.n = static_cast<int>(draws.size());
  report.ks_stat = ks_statistic_normal(draws);
  report.skew = skewness(draws);
  report.excess_kurtosis = excess_kurtosis(draws);
  return report;
}

std::vector<double> pooled_studentized(
    const std::vector<ReplicationRecord>& records, int target_index,
    std::optional<int> grid_id) {
  std::vector<double> draws;
  for (const auto& record : records) {
    if (grid_id && record.grid_id != *grid_id) continue;
    if (!record.valid) continue;
    const auto& target = record.targets.at(static_cast<size_t>(target_index));
    for (Index k = 0; k < target.studentized.size(); ++k) {
      draws.push_back(target.studentized(k));
    }
  }
  return draws;
}

BoundaryDemoResult boundary_demo(const std::vector<int>& grid_sizes,
                                 int replications, std::uint64_t base_seed,
                                 int threads) {
  auto make_config = [&](bool sparse_boundary, double alpha) {
    ExperimentConfig cfg;
    cfg.replications = replications;
    cfg.base_seed = base_seed;
    cfg.targets = {TargetSpec{TargetSpec::Kind::kFactor, -1, -1}};
    cfg.diagnostics.identities = false;
    for (int size : grid_sizes) {
      DgpDescriptor desc;
      desc.n = size;
      desc.t = size;
      desc.r = 1;
      desc.loading_scheme.alpha = alpha;
      desc.loading_scheme.kind = sparse_boundary
                                     ? LoadingKind::kSparseStrong
                                     : LoadingKind::kHomogeneous;
      // a single O(1) loading row needs some headroom over the noise
      // spectrum to keep the top singular pair identified at all sizes
      const double sigma = sparse_boundary ? 9.0 : 1.0;
      desc.loading_scheme.sigma_lambda = MatrixXd::Constant(1, 1, sigma);
      desc.factor_cov = MatrixXd::Identity(1, 1);
      desc.noise.base_sd = 1.0;
      cfg.dgp_grid.push_back(std::move(desc));
    }
    return cfg;
  };

  BoundaryDemoResult result;
  {
    const ExperimentConfig cfg = make_config(true, 0.0);
    const auto records = run_experiment(cfg, threads);
    result.flat = rate_regression(records, cfg, 0).fit;
  }
  {
    const ExperimentConfig cfg = make_config(false, 0.3);
    const auto records = run_experiment(cfg, threads);
    result.weak = rate_regression(records, cfg, 0).fit;
  }
  {
    const ExperimentConfig cfg = make_config(false, 1.0);
    const auto records = run_experiment(cfg, threads);
    result.strong = rate_regression(records, cfg, 0).fit;
  }
  return result;
}

}  // namespace weakfactor
