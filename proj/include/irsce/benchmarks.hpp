#pragma once

// Benchmark schemes: the decoupled ON/OFF estimator (simulated) and the
// per-antenna scheme (overhead only).
//
// The decoupled estimator is a reconstruction. Stage A estimates R with IRS 2
// OFF, stage B estimates R~ with IRS 1 OFF, stage C turns both ON, cancels the
// two single-reflection contributions and fits Q_m = R~ diag(c_m). Stages D and
// E estimate the scalings b_k (IRS 2 OFF) and b~_k (IRS 1 OFF) of users 2..K.

#include "irsce/channel_model.hpp"
#include "irsce/estimators.hpp"

namespace irsce {

struct DecoupledSchedule {
  CMatrix thetaA;   ///< M1 x I_A, IRS 1 training (IRS 2 OFF)
  CMatrix thetaB;   ///< M2 x I_B, IRS 2 training (IRS 1 OFF)
  CMatrix thetaC1;  ///< M1 x I_C
  CMatrix thetaC2;  ///< M2 x I_C (all-ones columns when N >= M2)
  CMatrix xD;       ///< (K - 1) x I_D pilots, IRS 2 OFF
  CMatrix thetaD;   ///< M1 x I_D
  CMatrix xE;       ///< (K - 1) x I_E pilots, IRS 1 OFF
  CMatrix thetaE;   ///< M2 x I_E

  int iA() const { return static_cast<int>(thetaA.cols()); }
  int iB() const { return static_cast<int>(thetaB.cols()); }
  int iC() const { return static_cast<int>(thetaC1.cols()); }
  int iD() const { return static_cast<int>(thetaD.cols()); }
  int iE() const { return static_cast<int>(thetaE.cols()); }
  int total() const { return iA() + iB() + iC() + iD() + iE(); }
};

struct DecoupledStageMinima {
  int a = 0, b = 0, c = 0, d = 0, e = 0;
};

DecoupledStageMinima decoupledMinima(int n, int m1, int m2, int k);

/// Pilot split for given single-user (A + B + C) and multi-user (D + E)
/// budgets; 0 selects the minima. Stages A and B get equal time; pilots above
/// the minima are dealt round-robin A, B, C (and D, E).
DecoupledStageMinima decoupledSplit(int n, int m1, int m2, int k, int singleUserBudget,
                                    int multiUserBudget);

/// DFT-submatrix training per stage. Stages whose LS problem is not
/// separable (N < M2 for C, N < M1 for D, N < M2 for E) use per-symbol random
/// phases instead of a fixed reflection.
DecoupledSchedule decoupledDesign(int n, int m1, int m2, int k, int singleUserBudget,
                                  int multiUserBudget, Rng& rng);

struct DecoupledOptions {
  /// Stages D and E use the true reference-user CSI.
  bool perfectReference = false;
};

EstimateReport decoupledEstimate(const CascadedChannelSet& cc, const DecoupledSchedule& schedule,
                                 double sigma2, Rng& rng, const DecoupledOptions& options = {});

/// Minimum total pilots of the decoupled scheme from the per-stage minima.
int decoupledOverhead(int n, int m1, int m2, int k);

/// K M + K M^2 / 4 with M = M1 + M2; throws Unsupported unless M1 == M2.
int perAntennaOverhead(int m1, int m2, int k);

}  // namespace irsce
