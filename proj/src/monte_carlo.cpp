#include "irsce/monte_carlo.hpp"

#include "irsce/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace irsce {

namespace {

TrialOutcome runOne(int trial, const TrialFn& fn) {
  TrialOutcome out;
  try {
    out.samples = fn(trial);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<TrialOutcome> runTrialsSerial(int trials, const TrialFn& fn) {
  std::vector<TrialOutcome> out(static_cast<std::size_t>(std::max(trials, 0)));
  for (int t = 0; t < trials; ++t) out[t] = runOne(t, fn);
  return out;
}

int resolveThreadCount(int threads) {
  if (threads > 0) return threads;
  if (const char* env = std::getenv("IRSCE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<TrialOutcome> runTrialsParallel(int trials, const TrialFn& fn, int threads) {
  std::vector<TrialOutcome> out(static_cast<std::size_t>(std::max(trials, 0)));
  const int nt = resolveThreadCount(threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (int t = 0; t < trials; ++t) out[t] = runOne(t, fn);
  (void)nt;
  return out;
}

double pairwiseSum(const double* values, std::size_t count) {
  if (count == 0) return 0.0;
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwiseSum(values, half) + pairwiseSum(values + half, count - half);
}

std::vector<MetricSummary> summarize(const std::vector<TrialOutcome>& outcomes) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values, theories;
  for (const TrialOutcome& o : outcomes) {
    if (!o.ok) continue;
    for (const Sample& s : o.samples) {
      auto [it, inserted] = values.try_emplace(s.metric);
      if (inserted) order.push_back(s.metric);
      it->second.push_back(s.value);
      if (s.hasTheory) theories[s.metric].push_back(s.theory);
    }
  }
  std::vector<MetricSummary> out;
  for (const std::string& name : order) {
    const std::vector<double>& v = values[name];
    MetricSummary m;
    m.metric = name;
    m.trials = static_cast<long>(v.size());
    m.mean = pairwiseSum(v.data(), v.size()) / static_cast<double>(v.size());
    if (v.size() > 1) {
      std::vector<double> dev(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - m.mean) * (v[i] - m.mean);
      const double var = pairwiseSum(dev.data(), dev.size()) / static_cast<double>(v.size() - 1);
      m.stderror = std::sqrt(var / static_cast<double>(v.size()));
    }
    auto th = theories.find(name);
    if (th != theories.end() && !th->second.empty()) {
      m.hasTheory = true;
      m.theory = pairwiseSum(th->second.data(), th->second.size()) / static_cast<double>(th->second.size());
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace irsce
