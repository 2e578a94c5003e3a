#pragma once

#include <vector>

#include "weakfactor/estimator.hpp"

namespace weakfactor {

enum class ExclusionKind { kUnit, kPeriodNeighborhood, kUnitNeighborhood };

struct Exclusion {
  ExclusionKind kind = ExclusionKind::kUnit;
  int index = 0;              // unit i or period t
  int delta = 0;              // PeriodNeighborhood half-width
  std::vector<int> members;   // rows/columns actually replaced
  bool clipped = false;       // window hit a panel boundary
};

/// A panel whose excluded rows/columns were replaced by the true common
/// component, with its own fit and alignment against the same truth.
struct LeaveOutPanel {
  MatrixXd panel;
  Exclusion excluded;
  PcFit fit;
  Alignment alignment;
};

LeaveOutPanel leave_one_out(const MatrixXd& x, const FactorStructure& truth,
                            int i, int r);
LeaveOutPanel leave_one_out(const MatrixXd& x, const FactorStructure& truth,
                            int i, int r, const TruthOracle& oracle);

/// Replaces columns in the delta-neighborhood of period t (clipped to the
/// panel) by truth columns.
LeaveOutPanel leave_neighbor_out(const MatrixXd& x,
                                 const FactorStructure& truth, int t,
                                 int delta, int r);
LeaveOutPanel leave_neighbor_out(const MatrixXd& x,
                                 const FactorStructure& truth, int t,
                                 int delta, int r, const TruthOracle& oracle);

/// Replaces the rows of unit i's neighbor set (the generator's block) by
/// truth rows; i must belong to the set.
LeaveOutPanel leave_unit_neighbor_out(const MatrixXd& x,
                                      const FactorStructure& truth, int i,
                                      const std::vector<int>& neighbor_set,
                                      int r);
LeaveOutPanel leave_unit_neighbor_out(const MatrixXd& x,
                                      const FactorStructure& truth, int i,
                                      const std::vector<int>& neighbor_set,
                                      int r, const TruthOracle& oracle);

/// The exact decomposition of Y_r O - Y0 into the first-order noise term
/// and the two remainders:
///   Y_r O - Y0 = E Z0 (Z0'Z0)^{-1}
///              + E (Zt (Zt'Zt)^{-1} - Z0 (Z0'Z0)^{-1})        [r1]
///              + Y0 (Z0'Zt (Zt'Zt)^{-1} - I)                  [r2]
/// with Zt = Z_r O. identity_gap is the Frobenius norm of the residual of
/// this identity and vanishes in exact arithmetic.
struct DecompositionResiduals {
  MatrixXd first_order;
  MatrixXd r1;
  MatrixXd r2;
  double identity_gap = 0.0;
};

DecompositionResiduals decomposition_residuals(const PcFit& fit,
                                               const TruthOracle& oracle,
                                               const Alignment& al,
                                               const MatrixXd& noise);

/// The leave-one-out perturbation matrices of the r1 expansion:
///   delta1 = Zt(-i) (Zt(-i)'Zt(-i))^{-1} - Z0 (Z0'Z0)^{-1}
///   delta2 = Zt (Zt'Zt)^{-1} - Zt(-i) (Zt(-i)'Zt(-i))^{-1}
/// Row i of r1 equals sum_t eps_it (delta1_t + delta2_t) identically.
struct DeltaMatrices {
  MatrixXd delta1;  // T x r
  MatrixXd delta2;  // T x r
};

DeltaMatrices delta_matrices(const PcFit& full_fit, const Alignment& full_al,
                             const LeaveOutPanel& loo,
                             const TruthOracle& oracle);

/// Gap of the Claim-symmetric identity
///   Dz' Z0 - Y0' Dy = (Dy'Dy - Dz'Dz) / 2
/// with Dy = Y_r O - Y0, Dz = Z_r O - Z0; exact for the Procrustes O.
double claim_symmetric_gap(const PcFit& fit, const TruthOracle& oracle,
                           const Alignment& al);

/// Loading-side first-order perturbation of a period-neighborhood
/// exclusion:
///   Yt(-N) (Yt(-N)'Yt(-N))^{-1} - Y0 (Y0'Y0)^{-1},  Yt = Y_r O.
/// Under MA(q) noise with delta >= q the excluded columns' noise is
/// independent of this matrix.
MatrixXd period_delta1(const LeaveOutPanel& loo, const TruthOracle& oracle);

}  // namespace weakfactor
