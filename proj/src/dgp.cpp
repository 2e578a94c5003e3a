#include "weakfactor/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "weakfactor/core.hpp"

namespace weakfactor {

namespace {

constexpr double kMaxArRoot = 0.99;
constexpr double kLoadingTruncation = 6.0;

double clamp_unit_gaussian(double z) {
  return std::clamp(z, -kLoadingTruncation, kLoadingTruncation);
}

VectorXd draw_clamped_gaussians(RngStream& rng, int r) {
  VectorXd z(r);
  for (int k = 0; k < r; ++k) z(k) = clamp_unit_gaussian(rng.gaussian());
  return z;
}

double operator_norm(const MatrixXd& m) {
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

int sparse_strong_count(int n, double alpha) {
  const double v = std::pow(static_cast<double>(n), alpha);
  const int k = static_cast<int>(std::ceil(v - 1e-9));
  return std::clamp(k, 1, n);
}

}  // namespace

MatrixXd cholesky_factor(const MatrixXd& spd) {
  if (spd.rows() != spd.cols()) {
    throw NotSpd("matrix is not square: " + std::to_string(spd.rows()) + " x " +
                 std::to_string(spd.cols()));
  }
  if (!spd.isApprox(spd.transpose(), 1e-12)) {
    throw NotSpd("matrix is not symmetric");
  }
  Eigen::LLT<MatrixXd> llt(spd);
  if (llt.info() != Eigen::Success) {
    throw NotSpd("Cholesky factorization failed (matrix not positive definite)");
  }
  return llt.matrixL();
}

void LoadingScheme::validate(int r) const {
  if (alpha < 0.0 || alpha > 1.0) {
    throw InvalidScheme("alpha must lie in (0,1], got " + std::to_string(alpha));
  }
  if (alpha == 0.0 && kind != LoadingKind::kSparseStrong) {
    throw InvalidScheme("alpha = 0 is only supported for SparseStrong");
  }
  if (sigma_lambda.rows() != r || sigma_lambda.cols() != r) {
    throw InvalidScheme("sigma_lambda must be r x r");
  }
  cholesky_factor(sigma_lambda);
  if (exponent_spread < 0.0) {
    throw InvalidScheme("exponent_spread must be nonnegative");
  }
  if (kind == LoadingKind::kHeterogeneousExponents &&
      alpha - exponent_spread > 1.0) {
    throw InvalidScheme("exponent spread pushes every alpha_i above 1");
  }
}

double heterogeneous_calibration(int n, double spread) {
  const double log_n = std::log(static_cast<double>(n));
  if (spread <= 1e-12 || log_n <= 0.0) return 1.0;
  // E[n^{u}] over u ~ U(-s, s) equals (n^s - n^{-s}) / (2 s ln n); divide
  // it back out so trace(Lambda'Lambda)/n^alpha keeps its target in
  // expectation.
  const double mean_power = (std::pow(static_cast<double>(n), spread) -
                             std::pow(static_cast<double>(n), -spread)) /
                            (2.0 * spread * log_n);
  return 1.0 / std::sqrt(mean_power);
}

std::pair<MatrixXd, VectorXd> gen_loadings(const LoadingScheme& scheme, int n,
                                           int r, RngStream& rng) {
  if (n < r) throw InvalidScheme("need n >= r");
  scheme.validate(r);
  const MatrixXd chol = cholesky_factor(scheme.sigma_lambda);

  MatrixXd loadings = MatrixXd::Zero(n, r);
  VectorXd alpha_units(n);

  switch (scheme.kind) {
    case LoadingKind::kHomogeneous: {
      const double scale =
          std::pow(static_cast<double>(n), (scheme.alpha - 1.0) / 2.0);
      for (int i = 0; i < n; ++i) {
        loadings.row(i) = (scale * (chol * draw_clamped_gaussians(rng, r)))
                              .transpose();
      }
      alpha_units.setConstant(scheme.alpha);
      break;
    }
    case LoadingKind::kSparseStrong: {
      const int n_strong = sparse_strong_count(n, scheme.alpha);
      alpha_units.setConstant(-std::numeric_limits<double>::infinity());
      for (int i = 0; i < n_strong; ++i) {
        loadings.row(i) = (chol * draw_clamped_gaussians(rng, r)).transpose();
        alpha_units(i) = 1.0;
      }
      break;
    }
    case LoadingKind::kHeterogeneousExponents: {
      const double s = scheme.exponent_spread;
      const double calibration = heterogeneous_calibration(n, s);
      for (int i = 0; i < n; ++i) {
        const double alpha_i =
            std::min(1.0, scheme.alpha + rng.uniform(-s, s));
        alpha_units(i) = alpha_i;
        const double scale =
            calibration *
            std::pow(static_cast<double>(n), (alpha_i - 1.0) / 2.0);
        loadings.row(i) =
            (scale * (chol * draw_clamped_gaussians(rng, r))).transpose();
      }
      break;
    }
  }
  return {std::move(loadings), std::move(alpha_units)};
}

MatrixXd gen_factors(int t, int r, const MatrixXd& sigma_f, RngStream& rng) {
  if (t < r) throw ShapeMismatch("need t >= r");
  if (sigma_f.rows() != r || sigma_f.cols() != r) {
    throw NotSpd("factor_cov must be r x r");
  }
  const MatrixXd chol = cholesky_factor(sigma_f);
  MatrixXd factors(t, r);
  for (int s = 0; s < t; ++s) {
    VectorXd z(r);
    for (int k = 0; k < r; ++k) z(k) = rng.gaussian();
    factors.row(s) = (chol * z).transpose();
  }
  return factors;
}

double NoiseSpec::max_ar_root() const {
  if (temporal != TemporalKind::kAr || coeffs.size() == 0) return 0.0;
  const int p = static_cast<int>(coeffs.size());
  // companion matrix of psi^p - phi_1 psi^{p-1} - ... - phi_p
  MatrixXd companion = MatrixXd::Zero(p, p);
  companion.row(0) = coeffs.transpose();
  if (p > 1) companion.block(1, 0, p - 1, p - 1).setIdentity();
  const auto roots = companion.eigenvalues();
  double max_mod = 0.0;
  for (int k = 0; k < p; ++k) max_mod = std::max(max_mod, std::abs(roots(k)));
  return max_mod;
}

void NoiseSpec::validate(int n) const {
  if (base_sd < 0.0) throw InvalidScheme("base_sd must be nonnegative");
  if (cross == CrossKind::kBlockNeighbors) {
    if (block_size < 1 || block_size > n) {
      throw InvalidBlock("block_size " + std::to_string(block_size) +
                         " must lie in [1, n = " + std::to_string(n) + "]");
    }
    if (std::abs(rho) >= 1.0) {
      throw NotSpd("block correlation must lie in (-1, 1)");
    }
    // equicorrelation eigenvalues: 1 + (b-1) rho and 1 - rho
    if (block_size > 1 && 1.0 + (block_size - 1) * rho <= 1e-12) {
      throw NotSpd("equicorrelation with rho = " + std::to_string(rho) +
                   " is not positive definite at block size " +
                   std::to_string(block_size));
    }
  }
  if (temporal != TemporalKind::kIndependent) {
    if (innovation_sd <= 0.0) {
      throw InvalidScheme("innovation_sd must be positive");
    }
  }
  if (temporal == TemporalKind::kAr) {
    if (coeffs.size() == 0) throw NonStationary("AR needs at least one coefficient");
    const double root = max_ar_root();
    if (root >= kMaxArRoot) {
      throw NonStationary("characteristic root modulus " +
                          std::to_string(root) + " exceeds the bound " +
                          std::to_string(kMaxArRoot));
    }
  }
}

VectorXd NoiseSpec::autocovariances(int max_lag) const {
  VectorXd gamma = VectorXd::Zero(max_lag + 1);
  const double b2 = base_sd * base_sd;
  switch (temporal) {
    case TemporalKind::kIndependent:
      gamma(0) = b2;
      break;
    case TemporalKind::kMa: {
      const int q = static_cast<int>(coeffs.size());
      // theta_0 = 1 implicit
      VectorXd theta(q + 1);
      theta(0) = 1.0;
      theta.tail(q) = coeffs;
      const double s2 = innovation_sd * innovation_sd;
      for (int h = 0; h <= std::min(max_lag, q); ++h) {
        double acc = 0.0;
        for (int k = 0; k + h <= q; ++k) acc += theta(k) * theta(k + h);
        gamma(h) = b2 * s2 * acc;
      }
      break;
    }
    case TemporalKind::kAr: {
      const int p = static_cast<int>(coeffs.size());
      // Yule-Walker for gamma_0..gamma_p, then the recursion
      MatrixXd a = MatrixXd::Zero(p + 1, p + 1);
      VectorXd rhs = VectorXd::Zero(p + 1);
      rhs(0) = innovation_sd * innovation_sd;
      for (int k = 0; k <= p; ++k) {
        a(k, k) += 1.0;
        for (int j = 1; j <= p; ++j) a(k, std::abs(k - j)) -= coeffs(j - 1);
      }
      const VectorXd head = a.partialPivLu().solve(rhs);
      for (int h = 0; h <= std::min(max_lag, p); ++h) gamma(h) = head(h);
      for (int h = p + 1; h <= max_lag; ++h) {
        double acc = 0.0;
        for (int j = 1; j <= p; ++j) acc += coeffs(j - 1) * gamma(h - j);
        gamma(h) = acc;
      }
      gamma *= b2;
      break;
    }
  }
  return gamma;
}

double NoiseSpec::marginal_variance() const { return autocovariances(0)(0); }

double NoiseSpec::same_block_covariance() const {
  if (cross != CrossKind::kBlockNeighbors || block_size < 2) return 0.0;
  return rho * marginal_variance();
}

std::vector<int> NoiseSpec::neighbor_set(int i, int n) const {
  if (i < 0 || i >= n) throw IndexOutOfRange("unit index " + std::to_string(i));
  if (cross != CrossKind::kBlockNeighbors) return {i};
  const int start = (i / block_size) * block_size;
  const int stop = std::min(start + block_size, n);
  std::vector<int> block;
  for (int j = start; j < stop; ++j) block.push_back(j);
  return block;
}

namespace {

// Standard-normal innovations with the requested cross-sectional structure,
// unit marginal variance, drawn time-major so stream use is fixed.
MatrixXd draw_innovations(const NoiseSpec& spec, int n, int total,
                          RngStream& rng) {
  MatrixXd u(n, total);
  if (spec.cross == CrossKind::kIndependent || spec.block_size == 1 ||
      spec.rho == 0.0) {
    for (int s = 0; s < total; ++s)
      for (int i = 0; i < n; ++i) u(i, s) = rng.gaussian();
    return u;
  }
  std::map<int, MatrixXd> chol_by_size;
  auto chol_for = [&](int b) -> const MatrixXd& {
    auto it = chol_by_size.find(b);
    if (it == chol_by_size.end()) {
      MatrixXd c = MatrixXd::Constant(b, b, spec.rho);
      c.diagonal().setOnes();
      it = chol_by_size.emplace(b, cholesky_factor(c)).first;
    }
    return it->second;
  };
  for (int s = 0; s < total; ++s) {
    for (int start = 0; start < n; start += spec.block_size) {
      const int b = std::min(spec.block_size, n - start);
      VectorXd z(b);
      for (int k = 0; k < b; ++k) z(k) = rng.gaussian();
      u.col(s).segment(start, b) = chol_for(b) * z;
    }
  }
  return u;
}

}  // namespace

MatrixXd gen_noise(const NoiseSpec& spec, int n, int t, RngStream& rng) {
  spec.validate(n);
  const int order = static_cast<int>(spec.coeffs.size());
  int burn = 0;
  if (spec.temporal == TemporalKind::kAr) burn = 10 * (order + 1) + 50;
  if (spec.temporal == TemporalKind::kMa) burn = order;
  const int total = t + burn;

  const MatrixXd u = draw_innovations(spec, n, total, rng);
  MatrixXd eps(n, t);
  switch (spec.temporal) {
    case TemporalKind::kIndependent:
      eps = u;
      break;
    case TemporalKind::kAr: {
      VectorXd state(total);
      for (int i = 0; i < n; ++i) {
        for (int s = 0; s < total; ++s) {
          double v = spec.innovation_sd * u(i, s);
          for (int j = 1; j <= order && j <= s; ++j) {
            v += spec.coeffs(j - 1) * state(s - j);
          }
          state(s) = v;
        }
        eps.row(i) = state.tail(t).transpose();
      }
      break;
    }
    case TemporalKind::kMa: {
      for (int i = 0; i < n; ++i) {
        for (int s = 0; s < t; ++s) {
          double v = u(i, s + burn);
          for (int k = 1; k <= order; ++k) {
            v += spec.coeffs(k - 1) * u(i, s + burn - k);
          }
          eps(i, s) = spec.innovation_sd * v;
        }
      }
      break;
    }
  }
  return spec.base_sd * eps;
}

void DgpDescriptor::validate() const {
  if (r < 1) throw ConfigInvalid("rank must be positive");
  if (r > std::min(n, t)) {
    throw RankTooLarge("rank " + std::to_string(r) + " exceeds min(n, t) = " +
                       std::to_string(std::min(n, t)));
  }
  if (n < 2 || t < 2) {
    throw ConfigInvalid("need n, t >= 2; got n = " + std::to_string(n) +
                        ", t = " + std::to_string(t));
  }
  loading_scheme.validate(r);
  if (factor_cov.rows() != r || factor_cov.cols() != r) {
    throw NotSpd("factor_cov must be r x r");
  }
  cholesky_factor(factor_cov);
  noise.validate(n);
}

PanelInstance assemble_panel(const DgpDescriptor& desc) {
  desc.validate();
  RngStream rng_loadings(desc.seed, static_cast<std::uint64_t>(StreamTag::kLoadings));
  RngStream rng_factors(desc.seed, static_cast<std::uint64_t>(StreamTag::kFactors));
  RngStream rng_noise(desc.seed, static_cast<std::uint64_t>(StreamTag::kNoise));

  auto [loadings, alpha_units] =
      gen_loadings(desc.loading_scheme, desc.n, desc.r, rng_loadings);
  MatrixXd factors = gen_factors(desc.t, desc.r, desc.factor_cov, rng_factors);
  MatrixXd noise = gen_noise(desc.noise, desc.n, desc.t, rng_noise);

  FactorStructure truth;
  truth.common = loadings * factors.transpose();
  truth.loadings = std::move(loadings);
  truth.factors = std::move(factors);
  truth.rank = desc.r;
  truth.alpha = desc.loading_scheme.alpha;
  truth.alpha_units = std::move(alpha_units);
  double calibration = 1.0;
  if (desc.loading_scheme.kind == LoadingKind::kHeterogeneousExponents) {
    calibration =
        heterogeneous_calibration(desc.n, desc.loading_scheme.exponent_spread);
  }
  truth.loading_bound =
      calibration * kLoadingTruncation * std::sqrt(static_cast<double>(desc.r)) *
      operator_norm(cholesky_factor(desc.loading_scheme.sigma_lambda));

  PanelMatrix panel(truth.common + noise);
  return PanelInstance{std::move(panel), std::move(truth), std::move(noise)};
}

double ar1_conditional_mean(double phi, int delta, double eps_left,
                            double eps_right) {
  if (std::abs(phi) >= 1.0) {
    throw NonStationary("|phi| must be below 1, got " + std::to_string(phi));
  }
  if (delta < 0) throw IndexOutOfRange("delta must be nonnegative");
  const double num = std::pow(phi, delta + 1);
  const double den = 1.0 + std::pow(phi, 2 * delta + 2);
  return num / den * (eps_left + eps_right);
}

double gaussian_conditional_oracle(const MatrixXd& cov,
                                   const std::vector<int>& observed_idx,
                                   const VectorXd& observed_vals,
                                   int target_idx) {
  const Index d = cov.rows();
  if (cov.cols() != d) throw NotSpd("covariance must be square");
  if (target_idx < 0 || target_idx >= d) {
    throw IndexOutOfRange("target index " + std::to_string(target_idx));
  }
  if (static_cast<Index>(observed_idx.size()) != observed_vals.size()) {
    throw IndexOutOfRange("observed indices and values disagree in length");
  }
  for (int idx : observed_idx) {
    if (idx < 0 || idx >= d) {
      throw IndexOutOfRange("observed index " + std::to_string(idx));
    }
    if (idx == target_idx) {
      throw IndexOutOfRange("observed indices must exclude the target");
    }
  }
  Eigen::LLT<MatrixXd> full(cov);
  if (full.info() != Eigen::Success) throw NotSpd("covariance is not SPD");
  const Index m = static_cast<Index>(observed_idx.size());
  if (m == 0) return 0.0;

  MatrixXd sigma_xx(m, m);
  VectorXd sigma_yx(m);
  for (Index a = 0; a < m; ++a) {
    sigma_yx(a) = cov(target_idx, observed_idx[static_cast<size_t>(a)]);
    for (Index b = 0; b < m; ++b) {
      sigma_xx(a, b) = cov(observed_idx[static_cast<size_t>(a)],
                           observed_idx[static_cast<size_t>(b)]);
    }
  }
  Eigen::LLT<MatrixXd> llt(sigma_xx);
  if (llt.info() != Eigen::Success) throw NotSpd("observed block is not SPD");
  return sigma_yx.dot(llt.solve(observed_vals));
}

}  // namespace weakfactor
