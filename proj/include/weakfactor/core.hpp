#pragma once

#include "weakfactor/types.hpp"

namespace weakfactor {

/// Best rank-r approximation of x in Frobenius norm via dense SVD.
/// Columns ordered by descending singular value, sign convention applied.
/// Throws RankTooLarge if r > min(N,T) and DegenerateSpectrum if the
/// boundary gap (sigma_r - sigma_{r+1}) / sigma_1 falls below 1e-10.
TruncatedSvd truncated_svd(const MatrixXd& x, int r);

/// In-place deterministic sign fixing: for each column k the entry of
/// largest magnitude (first such row on ties) of left column k is made
/// positive; the matching right column is flipped along. Idempotent.
void apply_sign_convention(MatrixXd& left, MatrixXd& right);

BalancedFactors balanced_vectors(const TruncatedSvd& svd);

/// loadings_hat * factors_hat^T; throws ShapeMismatch on nonconformable
/// inputs.
MatrixXd reconstruct_common(const MatrixXd& loadings_hat,
                            const MatrixXd& factors_hat);

}  // namespace weakfactor
