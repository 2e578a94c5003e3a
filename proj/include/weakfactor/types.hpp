#pragma once

#include <Eigen/Dense>

#include "weakfactor/errors.hpp"

namespace weakfactor {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Observed N x T panel, cross-section units in rows, time periods in
/// columns. Entries must be finite and both dimensions at least 2.
struct PanelMatrix {
  MatrixXd values;

  explicit PanelMatrix(MatrixXd v);

  Index n_units() const { return values.rows(); }
  Index n_periods() const { return values.cols(); }
};

/// Ground-truth factor structure of a simulated panel: loadings (N x r),
/// factors (T x r), their product as the common component, and the
/// strength exponents used by the generator. alpha_units(i) is -inf for
/// units generated with an exactly zero loading row (excluded from
/// per-unit inference).
struct FactorStructure {
  MatrixXd loadings;       // Lambda0, N x r
  MatrixXd factors;        // F0, T x r
  MatrixXd common;         // M0 = Lambda0 * F0^T
  int rank = 0;            // r
  double alpha = 1.0;      // aggregate strength exponent
  VectorXd alpha_units;    // per-unit exponents alpha_i
  double loading_bound = 0.0;  // recorded constant C': |lambda_i| <= C' N^{(alpha_i-1)/2}

  Index n_units() const { return loadings.rows(); }
  Index n_periods() const { return factors.rows(); }
};

/// Top-r singular triplets of a panel, deterministic sign convention
/// applied: the largest-magnitude entry of each left column is positive,
/// right columns flipped along so U D V^T is unchanged.
struct TruncatedSvd {
  MatrixXd left;      // U_r, N x r, orthonormal columns
  VectorXd singular;  // diag(D_r), positive, strictly descending
  MatrixXd right;     // V_r, T x r, orthonormal columns

  int rank() const { return static_cast<int>(singular.size()); }
};

/// Balanced singular vectors Y_r = U_r D_r^{1/2}, Z_r = V_r D_r^{1/2};
/// both Grams equal D_r so the singular-value scale is split evenly.
struct BalancedFactors {
  MatrixXd y;  // N x r
  MatrixXd z;  // T x r
};

}  // namespace weakfactor
