#pragma once

#include "weakfactor/types.hpp"

namespace weakfactor {

/// PC estimates from the top-r SVD of a panel, under the normalization
/// F_hat'F_hat/T = I_r with Lambda_hat'Lambda_hat diagonal.
struct PcFit {
  TruncatedSvd svd;
  MatrixXd loadings_hat;  // T^{-1/2} U_r D_r
  MatrixXd factors_hat;   // sqrt(T) V_r
  BalancedFactors balanced;
};

PcFit pc_fit(const MatrixXd& x, int r);

/// Everything derived from the noiseless common component alone: its
/// reduced SVD (sign convention applied), balanced vectors, the rotation
/// h0 tying (Y0, Z0) back to (Lambda0, F0), and spectrum diagnostics.
/// Independent of the noise, so leave-out fits reuse one instance.
struct TruthOracle {
  TruncatedSvd svd;           // U0, D0, V0 of M0
  BalancedFactors balanced;   // Y0, Z0
  MatrixXd h0;                // r x r, Lambda0 = T^{-1/2} Y0 h0^{-T}, F0 = sqrt(T) Z0 h0
  double psi_min = 0.0;       // sigma_r(M0)
  double psi_max = 0.0;       // sigma_1(M0)
  double kappa = 0.0;         // psi_max / psi_min

  static TruthOracle from(const FactorStructure& truth);
};

/// Exact reduced SVD of the common component, computed through thin QR of
/// the loading and factor blocks plus an r x r SVD (a route independent
/// of the dense panel SVD). Throws RankDeficientTruth when
/// sigma_r / sigma_1 <= 1e-8.
std::pair<TruncatedSvd, BalancedFactors> oracle_svd_of_truth(
    const FactorStructure& truth);

/// The rotation of the noiseless decomposition:
/// h0 = T^{-1/2} ((Lambda0'Lambda0)^{1/2} G (D0)^{-1/2})^{-1} with G the
/// descending eigenvector matrix of
/// (Lambda0'Lambda0)^{1/2} (F0'F0/T) (Lambda0'Lambda0)^{1/2}, column signs
/// fixed so the reconstruction identities hold under the SVD sign
/// convention. Throws DegenerateTheta on (near-)tied eigenvalues.
MatrixXd oracle_rotation_h0(const FactorStructure& truth);
MatrixXd oracle_rotation_h0(const FactorStructure& truth,
                            const TruncatedSvd& truth_svd);

/// Orthogonal Procrustes minimizer of |a R - b|_F over the full
/// orthogonal group (reflections allowed): R = Uc Vc' from a'b = Uc S Vc'.
MatrixXd procrustes(const MatrixXd& a, const MatrixXd& b);

/// The matching matrices aligning a PC fit with a known truth.
struct Alignment {
  MatrixXd o;              // r x r orthonormal, Procrustes on stacked balanced vectors
  MatrixXd h0;             // oracle rotation
  MatrixXd h;              // (D_r^{1/2} O h0)^{-1}
  MatrixXd h_inv;          // D_r^{1/2} O h0, kept to avoid re-inversion
  MatrixXd h_bn0;          // Lambda0'Lambda0 F0' F_hat D_r^{-2}
  MatrixXd h_bn1;          // (F0' F_hat / T)^{-1}
  MatrixXd h_bn1_inv;      // F0' F_hat / T
  MatrixXd sign_estimate;  // diag(sign(diag(O))), empirical I_sgn
};

Alignment align(const PcFit& fit, const FactorStructure& truth);
Alignment align(const PcFit& fit, const FactorStructure& truth,
                const TruthOracle& oracle);

/// Rotated estimation errors of one fit against the truth.
struct ErrorReport {
  VectorXd per_unit_loading;   // |lambda_hat_i - H^{-1} lambda0_i|
  VectorXd per_period_factor;  // |f_hat_t - H' f0_t|
  MatrixXd common_abs;         // |m_hat_it - m0_it|, rotation-free
  VectorXd bn_loading;         // |lambda_hat_i - H_BN,1^{-T} lambda0_i|
};

ErrorReport rotated_errors(const PcFit& fit, const FactorStructure& truth,
                           const Alignment& al);

}  // namespace weakfactor
