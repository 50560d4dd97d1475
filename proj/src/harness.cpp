#include "irsce/harness.hpp"

#include "irsce/benchmarks.hpp"
#include "irsce/estimators.hpp"
#include "irsce/linalg.hpp"
#include "irsce/monte_carlo.hpp"
#include "irsce/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace irsce {

using nlohmann::json;

namespace {

struct ExperimentName {
  Experiment value;
  const char* name;
};

constexpr ExperimentName kExperiments[] = {
    {Experiment::OverheadVsN, "overhead_vs_N"},
    {Experiment::OverheadVsK, "overhead_vs_K"},
    {Experiment::MseDesignPhase1, "mse_design_phase1"},
    {Experiment::MseDesignPhase2, "mse_design_phase2"},
    {Experiment::MseVsAllocation, "mse_vs_allocation"},
    {Experiment::MseSingleUser, "mse_single_user"},
    {Experiment::MseMultiUser, "mse_multi_user"},
};

const std::set<std::string> kSweepParams = {
    "txPowerDbm", "noisePowerDbm", "sigma2", "n", "m1", "m2", "k",
    "i1", "i2", "i3", "totalPilots", "elementsPerSubsurface"};

[[noreturn]] void configError(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

}  // namespace

const char* toString(Experiment e) {
  for (const auto& x : kExperiments)
    if (x.value == e) return x.name;
  return "?";
}

Experiment parseExperiment(const std::string& s) {
  for (const auto& x : kExperiments)
    if (s == x.name) return x.value;
  configError("unknown experiment '" + s + "'");
}

void ExperimentSpec::validate() const {
  config.validate();
  if (trials < 1) configError("trials must be >= 1");
  if (sweepValues.empty()) configError("sweepValues must not be empty");
  if (!kSweepParams.count(sweepParam)) configError("unsupported sweep parameter '" + sweepParam + "'");
  for (double v : sweepValues)
    if (!std::isfinite(v)) configError("sweep values must be finite");
  if (i1 < 0 || i2 < 0 || i3 < 0 || totalPilots < 0) configError("pilot counts must be >= 0");
  if (maxRetries < 1) configError("maxRetries must be >= 1");
  if (sigma2 && !(*sigma2 >= 0.0 && std::isfinite(*sigma2))) configError("sigma2 must be >= 0");
  if (experiment == Experiment::MseVsAllocation && totalPilots == 0 && sweepParam != "totalPilots")
    configError("mse_vs_allocation needs totalPilots");
  if (experiment == Experiment::MseDesignPhase1 && phase1Designs.empty())
    configError("phase1Designs must not be empty");
  if (experiment == Experiment::MseDesignPhase2 && phase2Designs.empty())
    configError("phase2Designs must not be empty");
}

namespace {

Position parsePosition(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 3) configError(std::string(key) + " must be [x, y, z]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

template <typename T>
T getNumber(const json& v, const std::string& key) {
  if (!v.is_number()) configError(key + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) configError(key + " must be an integer");
  }
  return v.get<T>();
}

std::string getString(const json& v, const std::string& key) {
  if (!v.is_string()) configError(key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

ExperimentSpec parseSpec(const std::string& jsonText) {
  json doc;
  try {
    doc = json::parse(jsonText);
  } catch (const json::parse_error& e) {
    configError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) configError("spec must be a JSON object");

  ExperimentSpec s;
  SystemConfig& c = s.config;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "experiment") s.experiment = parseExperiment(getString(v, key));
      else if (key == "sweepParam") s.sweepParam = getString(v, key);
      else if (key == "sweepValues") {
        if (!v.is_array()) configError("sweepValues must be an array");
        s.sweepValues.clear();
        for (const auto& x : v) s.sweepValues.push_back(getNumber<double>(x, key));
      }
      else if (key == "trials") s.trials = getNumber<int>(v, key);
      else if (key == "n") c.n = getNumber<int>(v, key);
      else if (key == "m1") c.m1 = getNumber<int>(v, key);
      else if (key == "m2") c.m2 = getNumber<int>(v, key);
      else if (key == "k") c.k = getNumber<int>(v, key);
      else if (key == "txPowerDbm") c.txPowerDbm = getNumber<double>(v, key);
      else if (key == "noisePowerDbm") c.noisePowerDbm = getNumber<double>(v, key);
      else if (key == "gamma0Db") c.gamma0Db = getNumber<double>(v, key);
      else if (key == "alphaNear") c.alphaNear = getNumber<double>(v, key);
      else if (key == "alphaFar") c.alphaFar = getNumber<double>(v, key);
      else if (key == "bs") c.bs = parsePosition(v, "bs");
      else if (key == "irs1") c.irs1 = parsePosition(v, "irs1");
      else if (key == "irs2") c.irs2 = parsePosition(v, "irs2");
      else if (key == "userCenter") c.userCenter = parsePosition(v, "userCenter");
      else if (key == "userSpreadRadius") c.userSpreadRadius = getNumber<double>(v, key);
      else if (key == "elementsPerSubsurface") c.elementsPerSubsurface = getNumber<int>(v, key);
      else if (key == "seed") c.seed = getNumber<std::uint64_t>(v, key);
      else if (key == "i1") s.i1 = getNumber<int>(v, key);
      else if (key == "i2") s.i2 = getNumber<int>(v, key);
      else if (key == "i3") s.i3 = getNumber<int>(v, key);
      else if (key == "totalPilots") s.totalPilots = getNumber<int>(v, key);
      else if (key == "phase1Design") s.phase1Design = parsePhase1Design(getString(v, key));
      else if (key == "phase2Design") s.phase2Design = parsePhase2Design(getString(v, key));
      else if (key == "phase1Designs") {
        if (!v.is_array()) configError("phase1Designs must be an array");
        s.phase1Designs.clear();
        for (const auto& x : v) s.phase1Designs.push_back(parsePhase1Design(getString(x, key)));
      }
      else if (key == "phase2Designs") {
        if (!v.is_array()) configError("phase2Designs must be an array");
        s.phase2Designs.clear();
        for (const auto& x : v) s.phase2Designs.push_back(parsePhase2Design(getString(x, key)));
      }
      else if (key == "phase2Case") s.phase2Case = parseCaseSelect(getString(v, key));
      else if (key == "phase3Case") s.phase3Case = parseCaseSelect(getString(v, key));
      else if (key == "case2Mode") s.case2Mode = parseScheduleMode(getString(v, key));
      else if (key == "phase3Mode") s.phase3Mode = parseScheduleMode(getString(v, key));
      else if (key == "maxRetries") s.maxRetries = getNumber<int>(v, key);
      else if (key == "sigma2") s.sigma2 = getNumber<double>(v, key);
      else if (key == "parallel") {
        if (!v.is_boolean()) configError("parallel must be a boolean");
        s.parallel = v.get<bool>();
      }
      else if (key == "threads") s.threads = getNumber<int>(v, key);
      else if (key == "output") s.output = getString(v, key);
      else configError("unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    configError(std::string("bad value: ") + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec loadSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parseSpec(ss.str());
}

std::vector<ResultRow> ResultTable::metric(const std::string& name) const {
  std::vector<ResultRow> out;
  for (const ResultRow& r : rows)
    if (r.metric == name) out.push_back(r);
  return out;
}

namespace {

/// Scenario of one sweep point.
struct Point {
  SystemConfig config;
  ProposedOptions options;
  double sigma2 = 0.0;
  int totalPilots = 0;
};

int asCount(double v, const std::string& name) {
  if (v != std::floor(v) || v < 0 || v > 1e9) configError(name + " sweep values must be non-negative integers");
  return static_cast<int>(v);
}

Point makePoint(const ExperimentSpec& spec, double value) {
  Point p;
  p.config = spec.config;
  p.options.i1 = spec.i1;
  p.options.i2 = spec.i2;
  p.options.i3 = spec.i3;
  p.options.phase1Design = spec.phase1Design;
  p.options.phase2Design = spec.phase2Design;
  p.options.phase2Case = spec.phase2Case;
  p.options.phase3Case = spec.phase3Case;
  p.options.case2Mode = spec.case2Mode;
  p.options.phase3Mode = spec.phase3Mode;
  p.options.maxRetries = spec.maxRetries;
  p.totalPilots = spec.totalPilots;
  std::optional<double> sigma2 = spec.sigma2;

  const std::string& name = spec.sweepParam;
  if (name == "txPowerDbm") p.config.txPowerDbm = value;
  else if (name == "noisePowerDbm") p.config.noisePowerDbm = value;
  else if (name == "sigma2") {
    if (value < 0.0) configError("sigma2 sweep values must be >= 0");
    sigma2 = value;
  }
  else if (name == "n") p.config.n = asCount(value, name);
  else if (name == "m1") p.config.m1 = asCount(value, name);
  else if (name == "m2") p.config.m2 = asCount(value, name);
  else if (name == "k") p.config.k = asCount(value, name);
  else if (name == "i1") p.options.i1 = asCount(value, name);
  else if (name == "i2") p.options.i2 = asCount(value, name);
  else if (name == "i3") p.options.i3 = asCount(value, name);
  else if (name == "totalPilots") p.totalPilots = asCount(value, name);
  else if (name == "elementsPerSubsurface") p.config.elementsPerSubsurface = asCount(value, name);

  if (spec.experiment == Experiment::MseVsAllocation) {
    if (p.options.i1 < 1 || p.options.i1 >= p.totalPilots)
      configError("allocation needs 0 < i1 < totalPilots");
    p.options.i2 = p.totalPilots - p.options.i1;
  }
  p.config.validate();
  p.sigma2 = sigma2 ? *sigma2 : p.config.sigma2();
  return p;
}

double perEntryMse(const CMatrix& est, const CMatrix& truth) {
  return (est - truth).squaredNorm() / static_cast<double>(truth.size());
}

Sample sample(std::string metric, double value) { return {std::move(metric), value, 0.0, false}; }

Sample sample(std::string metric, double value, double theory) {
  return {std::move(metric), value, theory, true};
}

std::vector<CMatrix> stackUsers(const std::vector<UserCsi>& users) {
  std::vector<CMatrix> out;
  for (const UserCsi& u : users) {
    out.push_back(u.r);
    out.push_back(u.rTilde);
    for (const CMatrix& q : u.q) out.push_back(q);
  }
  return out;
}

std::vector<Sample> overheadRows(const Point& p) {
  const SystemConfig& c = p.config;
  std::vector<Sample> out;
  out.push_back(sample("overhead_proposed", overhead(Scheme::Proposed, c.n, c.m1, c.m2, c.k)));
  out.push_back(sample("overhead_decoupled", overhead(Scheme::Decoupled, c.n, c.m1, c.m2, c.k)));
  if (c.m1 == c.m2)
    out.push_back(sample("overhead_perAntenna", overhead(Scheme::PerAntenna, c.n, c.m1, c.m2, c.k)));
  return out;
}

std::vector<Sample> trialDesignPhase1(const ExperimentSpec& spec, const Point& p,
                                      const CascadedChannelSet& cc, Rng& rng) {
  std::vector<Sample> out;
  const int m1 = cc.m1(), m2 = cc.m2();
  const int i1 = p.options.i1 > 0 ? p.options.i1 : m2 + 1;
  CMatrix truth(cc.n(), m2 + 1);
  truth.col(0) = cc.g1;
  truth.rightCols(m2) = cc.qBar;
  for (Phase1Design d : spec.phase1Designs) {
    Phase1Schedule s = d == Phase1Design::Optimal ? phase1Design(m2, i1) : phase1RandomDesign(m2, i1, rng);
    s.theta1Fixed = CVector::Ones(m1);
    const Phase1Estimate est = lsPhase1(synthesizePhase1(cc, s, p.sigma2, rng), s.thetaBar2);
    CMatrix joint(cc.n(), m2 + 1);
    joint.col(0) = est.g1Hat;
    joint.rightCols(m2) = est.qBarHat;
    const std::string tag = toString(d);
    out.push_back(sample("mse_phase1_" + tag, perEntryMse(joint, truth),
                         theoreticalMsePhase1(s.thetaBar2, p.sigma2)));
    out.push_back(sample("nmse_qbar_" + tag, normalizedMse(est.qBarHat, cc.qBar)));
  }
  return out;
}

std::vector<Sample> trialDesignPhase2(const ExperimentSpec& spec, const Point& p,
                                      const CascadedChannelSet& cc, Rng& rng) {
  std::vector<Sample> out;
  const int m1 = cc.m1(), m2 = cc.m2();
  const int i2 = p.options.i2 > 0 ? p.options.i2 : 2 * m1 + 1;
  const CMatrix truth = trueCompositeF(cc);
  for (Phase2Design d : spec.phase2Designs) {
    const Phase2Schedule s = phase2Case1Design(d, m1, i2, m2, rng);
    const bool fullRank = linalg::numericalRank(s.omega) == s.omega.rows();
    const CMatrix fHat = estimateCompositeF(synthesizePhase2(cc, s, p.sigma2, rng), s.omega,
                                            fullRank ? RankPolicy::Strict : RankPolicy::MinNorm);
    const std::string tag = toString(d);
    const double mse = perEntryMse(fHat, truth);
    out.push_back(fullRank ? sample("mse_F_" + tag, mse, theoreticalMsePhase2Case1(s.omega, p.sigma2))
                           : sample("mse_F_" + tag, mse));
    out.push_back(sample("nmse_F_" + tag, normalizedMse(fHat, truth)));
  }
  return out;
}

std::vector<Sample> singleUserMetrics(const EstimateReport& rep, const CascadedChannelSet& cc,
                                      const std::string& suffix) {
  const UserCsi& truth = cc.users[0];
  return {sample("nmse_R" + suffix, normalizedMse(rep.rHat, truth.r)),
          sample("nmse_RTilde" + suffix, normalizedMse(rep.rTildeHat, truth.rTilde)),
          sample("nmse_Q" + suffix, normalizedMse(rep.qHat, truth.q))};
}

std::vector<Sample> trialAllocation(const Point& p, const CascadedChannelSet& cc, Rng& rng) {
  const EstimateReport rep = runProposed(cc, p.options, p.sigma2, rng);
  std::vector<Sample> out;
  out.push_back(sample("nmse_qbar", normalizedMse(rep.qBarHat, cc.qBar)));
  out.push_back(sample("nmse_E", normalizedMse(rep.eHat, cc.e)));
  for (Sample& s : singleUserMetrics(rep, cc, "")) out.push_back(std::move(s));
  return out;
}

// Smallest A + B + C budget the decoupled split accepts.
int decoupledSingleUserFloor(int n, int m1, int m2) {
  const DecoupledStageMinima s = decoupledSplit(n, m1, m2, 1, 0, 0);
  return s.a + s.b + s.c;
}

std::vector<Sample> trialSingleUser(const Point& p, const CascadedChannelSet& cc, Rng& rng) {
  const EstimateReport prop = runProposed(cc, p.options, p.sigma2, rng);
  const int single = std::max(prop.totalPilots(), decoupledSingleUserFloor(cc.n(), cc.m1(), cc.m2()));
  const DecoupledSchedule ds = decoupledDesign(cc.n(), cc.m1(), cc.m2(), 1, single, 0, rng);
  const EstimateReport dec = decoupledEstimate(cc, ds, p.sigma2, rng);
  std::vector<Sample> out = singleUserMetrics(prop, cc, "_proposed");
  for (Sample& s : singleUserMetrics(dec, cc, "_decoupled")) out.push_back(std::move(s));
  out.push_back(sample("pilots_proposed", prop.totalPilots()));
  out.push_back(sample("pilots_decoupled", dec.totalPilots()));
  return out;
}

int phasePilots(const EstimateReport& rep, const std::string& phase) {
  for (const auto& [name, count] : rep.pilotsUsed)
    if (name == phase) return count;
  return 0;
}

std::vector<Sample> trialMultiUser(const Point& p, const CascadedChannelSet& cc, Rng& rng) {
  if (cc.k() < 2) configError("mse_multi_user needs k >= 2");
  std::vector<Sample> out;
  const CMatrix lambda = trueLambda(cc);
  const int m1 = cc.m1(), m2 = cc.m2();
  // Phase III and stages D + E share one budget: the larger of the two minima.
  const DecoupledStageMinima dm = decoupledMinima(cc.n(), m1, m2, cc.k());
  const DesignCase c3 = resolvePhase3Case(p.options.phase3Case, cc.n(), m1, m2);
  const int i3 = p.options.i3 > 0 ? p.options.i3
                                  : std::max(minPhase3Pilots(c3, cc.k(), m1, m2, cc.n()), dm.d + dm.e);
  for (bool perfect : {true, false}) {
    ProposedOptions o = p.options;
    o.perfectReference = perfect;
    o.i3 = i3;
    const EstimateReport prop = runProposed(cc, o, p.sigma2, rng);
    const int single = std::max(phasePilots(prop, "phase1") + phasePilots(prop, "phase2"),
                                decoupledSingleUserFloor(cc.n(), m1, m2));
    const DecoupledSchedule ds =
        decoupledDesign(cc.n(), m1, m2, cc.k(), single, phasePilots(prop, "phase3"), rng);
    const EstimateReport dec = decoupledEstimate(cc, ds, p.sigma2, rng, {perfect});
    for (const EstimateReport* rep : {&prop, &dec}) {
      const std::string suffix = std::string("_") + rep->scheme;
      if (perfect) {
        out.push_back(sample("nmse_b" + suffix,
                             normalizedMse(rep->lambdaHat.topRows(m1), lambda.topRows(m1))));
        out.push_back(sample("nmse_bTilde" + suffix,
                             normalizedMse(rep->lambdaHat.bottomRows(m2), lambda.bottomRows(m2))));
      } else {
        std::vector<UserCsi> truth = cc.users;
        out.push_back(sample("nmse_all" + suffix, normalizedMse(stackUsers(rep->users), stackUsers(truth))));
        out.push_back(sample("pilots" + suffix, rep->totalPilots()));
      }
    }
  }
  return out;
}

std::string formatSweep(const std::string& name, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return name + "=" + buf;
}

}  // namespace

ResultTable runExperiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultTable table;
  const bool singleUser = spec.experiment == Experiment::MseDesignPhase1 ||
                          spec.experiment == Experiment::MseDesignPhase2 ||
                          spec.experiment == Experiment::MseVsAllocation ||
                          spec.experiment == Experiment::MseSingleUser;

  for (std::size_t sweepIndex = 0; sweepIndex < spec.sweepValues.size(); ++sweepIndex) {
    const double value = spec.sweepValues[sweepIndex];
    const std::string where = formatSweep(spec.sweepParam, value);
    Point p;
    try {
      p = makePoint(spec, value);
      if (singleUser) p.config.k = 1;
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }

    if (spec.experiment == Experiment::OverheadVsN || spec.experiment == Experiment::OverheadVsK) {
      std::vector<Sample> rows;
      try {
        rows = overheadRows(p);
      } catch (const Error& e) {
        throw Error(e.kind(), where + ": " + e.what());
      }
      for (const Sample& s : rows) table.rows.push_back({value, s.metric, s.value, 0.0, 1, std::nullopt});
      continue;
    }

    const TrialFn trial = [&](int t) -> std::vector<Sample> {
      // Channels depend on the trial index only, so every sweep point sees the
      // same fading draws; noise and random designs are drawn per point.
      const CascadedChannelSet cc = cascade(genChannels(p.config, static_cast<std::uint64_t>(t)));
      Rng rng(deriveSeed({p.config.seed, static_cast<std::uint64_t>(sweepIndex),
                          static_cast<std::uint64_t>(t), 0x6e6f697365ULL}));
      switch (spec.experiment) {
        case Experiment::MseDesignPhase1: return trialDesignPhase1(spec, p, cc, rng);
        case Experiment::MseDesignPhase2: return trialDesignPhase2(spec, p, cc, rng);
        case Experiment::MseVsAllocation: return trialAllocation(p, cc, rng);
        case Experiment::MseSingleUser: return trialSingleUser(p, cc, rng);
        case Experiment::MseMultiUser: return trialMultiUser(p, cc, rng);
        default: return {};
      }
    };

    const std::vector<TrialOutcome> outcomes = spec.parallel
                                                   ? runTrialsParallel(spec.trials, trial, spec.threads)
                                                   : runTrialsSerial(spec.trials, trial);
    int failed = 0;
    const TrialOutcome* firstFailure = nullptr;
    for (const TrialOutcome& o : outcomes)
      if (!o.ok) {
        ++failed;
        if (!firstFailure) firstFailure = &o;
      }
    if (failed == spec.trials)
      throw Error(ErrorKind::EstimationPrecondition,
                  where + ": every trial failed; first error: " + firstFailure->error);
    if (failed > 0) {
      table.failedTrials += failed;
      table.warnings.push_back(where + ": " + std::to_string(failed) +
                               " trial(s) excluded; first error: " + firstFailure->error);
    }
    for (const MetricSummary& m : summarize(outcomes)) {
      ResultRow row{value, m.metric, m.mean, m.stderror, m.trials, std::nullopt};
      if (m.hasTheory) row.theory = m.theory;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

}  // namespace

void writeCsv(const ResultTable& table, std::ostream& os) {
  os << "sweep,metric,mean,stderr,trials,theory\n";
  for (const ResultRow& r : table.rows) {
    os << sci(r.sweep) << ',' << r.metric << ',' << sci(r.mean) << ',' << sci(r.stderror) << ','
       << r.trials << ',';
    if (r.theory) os << sci(*r.theory);
    os << '\n';
  }
}

void emitCsv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  writeCsv(table, out);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

ResultTable parseCsv(std::istream& is) {
  ResultTable table;
  std::string line;
  if (!std::getline(is, line) || line != "sweep,metric,mean,stderr,trials,theory")
    throw Error(ErrorKind::Io, "missing or unexpected CSV header");
  int lineNo = 1;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw Error(ErrorKind::Io, "CSV line " + std::to_string(lineNo) + ": expected 6 fields");
    try {
      ResultRow r;
      r.sweep = std::stod(f[0]);
      r.metric = f[1];
      r.mean = std::stod(f[2]);
      r.stderror = std::stod(f[3]);
      r.trials = std::stol(f[4]);
      if (!f[5].empty()) r.theory = std::stod(f[5]);
      table.rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Io, "CSV line " + std::to_string(lineNo) + ": bad number");
    }
  }
  return table;
}

ResultTable readCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return parseCsv(in);
}

}  // namespace irsce
