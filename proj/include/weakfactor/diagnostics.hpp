#pragma once

#include "weakfactor/dgp.hpp"
#include "weakfactor/leaveout.hpp"

namespace weakfactor {

/// Frobenius gaps of the exact algebraic identities on one instance; all
/// vanish in exact arithmetic and must stay below 1e-8 numerically.
struct IdentityGaps {
  double rotation_loading = 0.0;   // Lambda0 - T^{-1/2} Y0 (h0)^{-T}
  double rotation_factor = 0.0;    // F0 - sqrt(T) Z0 h0
  double matching_loading = 0.0;   // Lambda_hat - Lambda0 H^{-T} vs balanced form
  double matching_factor = 0.0;    // F_hat - F0 H vs balanced form
  double claim_symmetric = 0.0;
  double balanced_truth = 0.0;     // Y0'Y0 - Z0'Z0
  double balanced_fit = 0.0;       // Y'Y - Z'Z
  double ydecomposition = 0.0;
  double decomp_r1 = 0.0;          // row-i reconstruction through delta1+delta2
  double hbn = 0.0;                // Bai-Ng style loading decomposition

  double max_gap() const;
};

struct InstanceDiagnostics {
  IdentityGaps gaps;
  double first_order_norm = 0.0;
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  double delta1_norm = 0.0;
  double delta2_norm = 0.0;
};

/// Runs the full identity suite on one simulated instance. The
/// leave-one-out unit for the r1 reconstruction defaults to the interior
/// unit floor(N/2).
InstanceDiagnostics run_identity_suite(const PanelInstance& instance, int r,
                                       int leave_out_unit = -1);

/// Same, reusing an already computed fit/oracle/alignment.
InstanceDiagnostics run_identity_suite(const PanelInstance& instance,
                                       const PcFit& fit,
                                       const TruthOracle& oracle,
                                       const Alignment& al,
                                       int leave_out_unit);

/// The 20 mixed-regime descriptors (N = 60, T = 80, r = 2, cycling
/// through the four dependence regimes) used by the `identities`
/// subcommand and the exact-identity gate.
std::vector<DgpDescriptor> identity_suite_grid(std::uint64_t seed);

}  // namespace weakfactor
