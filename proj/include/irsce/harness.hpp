#pragma once

// Config-driven Monte Carlo experiments and their CSV result tables.

#include "irsce/channel_model.hpp"
#include "irsce/training_design.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace irsce {

enum class Experiment {
  OverheadVsN,
  OverheadVsK,
  MseDesignPhase1,
  MseDesignPhase2,
  MseVsAllocation,
  MseSingleUser,
  MseMultiUser,
};

const char* toString(Experiment e);
Experiment parseExperiment(const std::string& s);

struct ExperimentSpec {
  Experiment experiment = Experiment::MseSingleUser;
  std::string sweepParam = "txPowerDbm";
  std::vector<double> sweepValues{15.0};
  int trials = 1000;
  SystemConfig config;

  int i1 = 0;  ///< 0 selects the per-phase minimum
  int i2 = 0;
  int i3 = 0;
  int totalPilots = 0;  ///< I1 + I2 for mse_vs_allocation

  Phase1Design phase1Design = Phase1Design::Optimal;
  Phase2Design phase2Design = Phase2Design::Optimal;
  std::vector<Phase1Design> phase1Designs{Phase1Design::Optimal, Phase1Design::Random};
  std::vector<Phase2Design> phase2Designs{Phase2Design::Optimal, Phase2Design::Heuristic,
                                          Phase2Design::Random};
  CaseSelect phase2Case = CaseSelect::Auto;
  CaseSelect phase3Case = CaseSelect::Auto;
  ScheduleMode case2Mode = ScheduleMode::Random;
  ScheduleMode phase3Mode = ScheduleMode::Random;
  int maxRetries = 32;

  /// Replaces the noise power derived from the config (may be 0).
  std::optional<double> sigma2;

  bool parallel = true;
  int threads = 0;
  std::string output;

  /// Throws Error(Config).
  void validate() const;
};

/// Parses the flat JSON spec document; unknown keys are rejected.
ExperimentSpec parseSpec(const std::string& jsonText);
ExperimentSpec loadSpec(const std::string& path);

struct ResultRow {
  double sweep = 0.0;
  std::string metric;
  double mean = 0.0;
  double stderror = 0.0;
  long trials = 0;
  std::optional<double> theory;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  int failedTrials = 0;
  std::vector<std::string> warnings;

  /// Rows for one metric in sweep order.
  std::vector<ResultRow> metric(const std::string& name) const;
};

ResultTable runExperiment(const ExperimentSpec& spec);

void writeCsv(const ResultTable& table, std::ostream& os);
void emitCsv(const ResultTable& table, const std::string& path);
ResultTable parseCsv(std::istream& is);
ResultTable readCsv(const std::string& path);

}  // namespace irsce
