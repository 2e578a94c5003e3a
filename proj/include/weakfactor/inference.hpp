#pragma once

#include "weakfactor/dgp.hpp"
#include "weakfactor/estimator.hpp"

namespace weakfactor {

/// Population-side covariance objects of the CLTs, built from the known
/// DGP: D (diagonal, descending square roots of the eigenvalues of
/// Sigma_L^{1/2} Sigma_F Sigma_L^{1/2}), its eigenvector matrix G,
/// Q = D G' Sigma_L^{-1/2}, and the noise-side matrices Phi.
struct AsymptoticObjects {
  MatrixXd sigma_lambda;
  MatrixXd sigma_f;
  VectorXd d_cal;        // diagonal of D
  MatrixXd g_cal;
  MatrixXd q_cal;
  MatrixXd phi_lambda_t;  // N^{-alpha} sum_{ij} lambda_i lambda_j' Cov(eps_it, eps_jt)
  MatrixXd phi_f_i;       // Var(eps_it) Sigma_F (factors are serially independent)
};

/// Oracle objects for a simulated instance; Phi_Lambda uses the realized
/// loadings with the generator's known noise moments (cross terms
/// included under block dependence).
AsymptoticObjects oracle_objects(const DgpDescriptor& desc,
                                 const FactorStructure& truth, int unit,
                                 int period);

/// Q^{-T} Phi_{F,i} Q^{-1}; divide by T for the finite-sample covariance
/// of lambda_hat_i - H^{-1} lambda0_i.
MatrixXd avar_loading(const AsymptoticObjects& obj);

/// D^{-2} Q Phi_{Lambda,t} Q' D^{-2}; divide by N^alpha for f_hat_t - H' f0_t.
MatrixXd avar_factor(const AsymptoticObjects& obj);

/// V_it = N^{-alpha} lambda_i' Sigma_L^{-1} Phi_{Lambda,t} Sigma_L^{-1} lambda_i
///      + T^{-1} f_t' Sigma_F^{-1} Phi_{F,i} Sigma_F^{-1} f_t.
/// Throws DegenerateVariance when either true vector is (numerically) zero.
double var_common(const FactorStructure& truth, const AsymptoticObjects& obj,
                  int unit, int period);

/// Feasible HAC analogue of avar_loading from fit residuals: bandwidth 0
/// gives (1/T) sum_t f_hat_t f_hat_t' ehat_it^2, otherwise the
/// Bartlett-kernel long-run version (PSD by kernel choice).
MatrixXd plugin_avar_loading(const PcFit& fit, const MatrixXd& x, int unit,
                             int bandwidth);

/// Per-coordinate Wald intervals and the studentized error vector.
struct ConfidenceReport {
  VectorXd center;
  MatrixXd covariance;
  double level = 0.0;
  std::vector<bool> interval_hits;  // truth inside center +- z sqrt(cov_kk)
  VectorXd studentized;             // cov^{-1/2} (center - truth)
};

ConfidenceReport confidence_interval(const VectorXd& center,
                                     const MatrixXd& covariance,
                                     const VectorXd& truth_value,
                                     double level);

/// Per-coordinate Wald hits; a 1e-10 absolute slack keeps zero-width
/// intervals covering fp-scale errors on noiseless panels.
std::vector<bool> wald_interval_hits(const VectorXd& center,
                                     const MatrixXd& covariance,
                                     const VectorXd& truth_value,
                                     double level);

}  // namespace weakfactor
