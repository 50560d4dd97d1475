#pragma once

// Trial runners. The serial runner is the reference; the OpenMP runner must
// produce identical outcomes because every trial owns its RNG and results are
// stored by trial index before any aggregation.

#include <functional>
#include <string>
#include <vector>

namespace irsce {

struct Sample {
  std::string metric;
  double value = 0.0;
  double theory = 0.0;
  bool hasTheory = false;
};

struct TrialOutcome {
  bool ok = false;
  std::vector<Sample> samples;
  std::string error;
};

using TrialFn = std::function<std::vector<Sample>(int trial)>;

std::vector<TrialOutcome> runTrialsSerial(int trials, const TrialFn& fn);

/// `threads` <= 0 uses the IRSCE_THREADS environment variable, else the
/// OpenMP default.
std::vector<TrialOutcome> runTrialsParallel(int trials, const TrialFn& fn, int threads = 0);

/// Threads the parallel runner will use for `threads`.
int resolveThreadCount(int threads);

/// Sum by recursive halving in index order.
double pairwiseSum(const double* values, std::size_t count);

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  double stderror = 0.0;
  long trials = 0;
  double theory = 0.0;
  bool hasTheory = false;
};

/// Per-metric mean and standard error over successful trials, metrics in the
/// order of their first appearance. Theory values are averaged the same way.
std::vector<MetricSummary> summarize(const std::vector<TrialOutcome>& outcomes);

}  // namespace irsce
