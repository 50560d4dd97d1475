#pragma once

// End-to-end always-ON three-phase estimation: synthesizes the received
// training signals from a cascaded channel set, runs the LS stages and
// recovers the CSI of every user.

#include "irsce/channel_model.hpp"
#include "irsce/estimators.hpp"
#include "irsce/training_design.hpp"

namespace irsce {

struct ProposedOptions {
  int i1 = 0;  ///< 0 selects the minimum for each phase
  int i2 = 0;
  int i3 = 0;
  Phase1Design phase1Design = Phase1Design::Optimal;
  Phase2Design phase2Design = Phase2Design::Optimal;
  CaseSelect phase2Case = CaseSelect::Auto;
  CaseSelect phase3Case = CaseSelect::Auto;
  ScheduleMode case2Mode = ScheduleMode::Random;
  ScheduleMode phase3Mode = ScheduleMode::Random;
  int maxRetries = 32;
  /// Phase II uses the true Q-bar instead of the Phase I estimate.
  bool perfectPhase1 = false;
  /// Phase III uses the true reference-user CSI instead of its estimate.
  bool perfectReference = false;
};

/// Runs Phases I-III (Phase III only for K >= 2) with noise power `sigma2`.
/// Reflection draws and noise come from `rng`.
EstimateReport runProposed(const CascadedChannelSet& cc, const ProposedOptions& options,
                           double sigma2, Rng& rng);

/// Phase I only; returns the received Z1 for the given schedule.
CMatrix synthesizePhase1(const CascadedChannelSet& cc, const Phase1Schedule& schedule,
                         double sigma2, Rng& rng);

/// Reference-user received signals for a Phase II schedule, one column per symbol.
CMatrix synthesizePhase2(const CascadedChannelSet& cc, const Phase2Schedule& schedule,
                         double sigma2, Rng& rng);

/// Superimposed signals of users 2..K for a Phase III schedule, one column per symbol.
CMatrix synthesizePhase3(const CascadedChannelSet& cc, const Phase3Schedule& schedule,
                         double sigma2, Rng& rng);

/// Ground-truth composite CSI [Q-bar E, R_1].
CMatrix trueCompositeF(const CascadedChannelSet& cc);

/// Ground-truth Lambda = [[b_k; b~_k]] for users 2..K.
CMatrix trueLambda(const CascadedChannelSet& cc);

}  // namespace irsce
