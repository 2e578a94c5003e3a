#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "weakfactor/rng.hpp"
#include "weakfactor/types.hpp"

namespace weakfactor {

enum class LoadingKind { kHomogeneous, kSparseStrong, kHeterogeneousExponents };

/// How loading rows scale with N. Homogeneous: every unit at strength
/// alpha. SparseStrong: ceil(N^alpha) units with O(1) loadings, the rest
/// exactly zero. HeterogeneousExponents: per-unit exponents spread
/// uniformly around alpha, recalibrated so trace(Lambda'Lambda)/N^alpha
/// keeps its target in expectation.
struct LoadingScheme {
  LoadingKind kind = LoadingKind::kHomogeneous;
  double alpha = 1.0;           // in (0,1]; SparseStrong also accepts 0
  MatrixXd sigma_lambda;        // r x r SPD
  double exponent_spread = 0.0; // HeterogeneousExponents only

  void validate(int r) const;
};

enum class CrossKind { kIndependent, kBlockNeighbors };
enum class TemporalKind { kIndependent, kAr, kMa };

/// One of the four dependence regimes: cross-sectional structure
/// (independent rows vs contiguous equicorrelated blocks) crossed with
/// temporal structure (white noise vs per-row AR(p)/MA(q) filters driven
/// by the cross-sectional innovations). base_sd scales the final matrix;
/// innovation_sd is the white-noise sd inside AR/MA filters.
struct NoiseSpec {
  CrossKind cross = CrossKind::kIndependent;
  int block_size = 1;
  double rho = 0.0;

  TemporalKind temporal = TemporalKind::kIndependent;
  VectorXd coeffs;             // AR phi_1..phi_p or MA theta_1..theta_q
  double innovation_sd = 1.0;

  double base_sd = 1.0;        // >= 0; 0 gives a noiseless panel

  void validate(int n) const;

  /// Marginal Var(eps_it) implied by the spec (stationary, includes
  /// base_sd^2).
  double marginal_variance() const;
  /// Cov(eps_it, eps_jt) for i != j in the same block (0 when
  /// cross-independent).
  double same_block_covariance() const;
  /// Stationary autocovariances gamma_0..gamma_max_lag of one row,
  /// including base_sd^2.
  VectorXd autocovariances(int max_lag) const;
  /// Members of unit i's neighbor set N_delta(i) (its block; {i} when
  /// cross-independent).
  std::vector<int> neighbor_set(int i, int n) const;
  /// Largest characteristic-root modulus of the AR polynomial (0 for
  /// non-AR specs).
  double max_ar_root() const;
};

struct DgpDescriptor {
  int n = 0;
  int t = 0;
  int r = 0;
  LoadingScheme loading_scheme;
  MatrixXd factor_cov;  // Sigma_F, r x r SPD
  NoiseSpec noise;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PanelInstance {
  PanelMatrix panel;
  FactorStructure truth;
  MatrixXd noise;
};

/// Cholesky factor of an SPD matrix; throws NotSpd.
MatrixXd cholesky_factor(const MatrixXd& spd);

/// Scale constant c_N of the HeterogeneousExponents scheme, computed
/// analytically from the uniform exponent distribution.
double heterogeneous_calibration(int n, double spread);

std::pair<MatrixXd, VectorXd> gen_loadings(const LoadingScheme& scheme, int n,
                                           int r, RngStream& rng);

MatrixXd gen_factors(int t, int r, const MatrixXd& sigma_f, RngStream& rng);

MatrixXd gen_noise(const NoiseSpec& spec, int n, int t, RngStream& rng);

/// panel = Lambda0 F0^T + E, with truth and noise retained for oracle
/// diagnostics. Pure function of the descriptor (identical seed gives a
/// bit-identical instance).
PanelInstance assemble_panel(const DgpDescriptor& desc);

/// Exact E[eps_t | eps_{t-delta-1}, eps_{t+delta+1}] for a stationary
/// Gaussian AR(1):  phi^{delta+1} / (1 + phi^{2 delta + 2}) * (left + right).
double ar1_conditional_mean(double phi, int delta, double eps_left,
                            double eps_right);

/// Exact Gaussian conditional mean Sigma_yx Sigma_xx^{-1} x of the target
/// coordinate given observed coordinates; independent oracle for the AR
/// closed forms.
double gaussian_conditional_oracle(const MatrixXd& cov,
                                   const std::vector<int>& observed_idx,
                                   const VectorXd& observed_vals,
                                   int target_idx);

}  // namespace weakfactor
