// irsce: command-line front end for the experiments, the overhead calculator
// and the training-design certificates.

#include "irsce/benchmarks.hpp"
#include "irsce/estimators.hpp"
#include "irsce/harness.hpp"
#include "irsce/linalg.hpp"
#include "irsce/serialization.hpp"
#include "irsce/training_design.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int exitCodeFor(const irsce::Error& e) {
  switch (e.kind()) {
    case irsce::ErrorKind::Config:
    case irsce::ErrorKind::InvalidArgument:
    case irsce::ErrorKind::InsufficientPilots:
    case irsce::ErrorKind::CaseMismatch:
    case irsce::ErrorKind::Unsupported:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

struct RunArgs {
  std::string config;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool serial = false;
};

int cmdRun(const RunArgs& a) {
  irsce::ExperimentSpec spec = irsce::loadSpec(a.config);
  if (a.trials) spec.trials = *a.trials;
  if (a.seed) spec.config.seed = *a.seed;
  if (!a.out.empty()) spec.output = a.out;
  if (a.serial) spec.parallel = false;
  const irsce::ResultTable table = irsce::runExperiment(spec);
  for (const std::string& w : table.warnings) std::cerr << "warning: " << w << '\n';
  if (spec.output.empty() || spec.output == "-") {
    irsce::writeCsv(table, std::cout);
  } else {
    irsce::emitCsv(table, spec.output);
    std::cerr << "wrote " << table.rows.size() << " rows to " << spec.output << '\n';
  }
  return 0;
}

struct OverheadArgs {
  std::string scheme;
  int n = 0, m1 = 0, m2 = 0, k = 0;
  bool phases = false;
};

int cmdOverhead(const OverheadArgs& a) {
  const irsce::Scheme scheme = irsce::parseScheme(a.scheme);
  if (a.phases && scheme == irsce::Scheme::Proposed) {
    const irsce::PhaseOverhead o = irsce::proposedOverhead(a.n, a.m1, a.m2, a.k);
    std::cout << "phase1 " << o.phase1 << "\nphase2 " << o.phase2 << "\nphase3 " << o.phase3
              << "\ntotal " << o.total() << '\n';
    return 0;
  }
  std::cout << irsce::overhead(scheme, a.n, a.m1, a.m2, a.k) << '\n';
  return 0;
}

struct VerifyArgs {
  int phase = 0;
  std::string config;
  bool json = false;
};

bool report(const char* name, double deviation, double tol) {
  const bool ok = deviation <= tol;
  std::printf("  %-32s %.3e %s\n", name, deviation, ok ? "ok" : "FAIL");
  return ok;
}

int cmdVerify(const VerifyArgs& a) {
  irsce::ExperimentSpec spec;
  if (!a.config.empty()) spec = irsce::loadSpec(a.config);
  const irsce::SystemConfig& c = spec.config;
  constexpr double tol = 1e-10;
  irsce::Rng rng(irsce::deriveSeed({c.seed, 0x64657369676eULL}));
  bool pass = true;
  nlohmann::json schedule;

  if (a.phase == 1) {
    const int i1 = spec.i1 > 0 ? spec.i1 : c.m2 + 1;
    irsce::Phase1Schedule s = spec.phase1Design == irsce::Phase1Design::Optimal
                                  ? irsce::phase1Design(c.m2, i1)
                                  : irsce::phase1RandomDesign(c.m2, i1, rng);
    s.theta1Fixed = irsce::CVector::Ones(c.m1);
    std::printf("phase 1: M2=%d I1=%d design=%s\n", c.m2, i1, irsce::toString(spec.phase1Design));
    pass = report("ThetaBar2 ThetaBar2^H = I1 I", irsce::orthogonalityDeviation(s.thetaBar2, i1), tol);
    schedule = irsce::toJson(s);
  } else if (a.phase == 2) {
    const irsce::DesignCase dc = irsce::resolvePhase2Case(spec.phase2Case, c.n, c.m2);
    if (dc == irsce::DesignCase::Case1) {
      const int i2 = spec.i2 > 0 ? spec.i2 : 2 * c.m1 + 1;
      const irsce::Phase2Schedule s = irsce::phase2Case1Design(spec.phase2Design, c.m1, i2, c.m2, rng);
      std::printf("phase 2 (case 1): M1=%d I2=%d design=%s\n", c.m1, i2,
                  irsce::toString(spec.phase2Design));
      const irsce::Phase2ConditionReport r = irsce::verifyPhase2Conditions(s.theta1, s.psi, tol);
      pass &= report("Theta1 Theta1^H = I2 I", r.orthogonality, tol);
      pass &= report("Theta1 1 = 0", r.zeroRowSum, tol);
      pass &= report("Theta1 psi = 0", r.psiOrthogonal, tol);
      pass &= report("Theta1 diag(psi^H) Theta1^H = 0", r.shiftedCross, tol);
      pass &= report("Omega Omega^H = I2 I", irsce::orthogonalityDeviation(s.omega, i2), tol);
      schedule = irsce::toJson(s);
    } else {
      const int i2 = spec.i2 > 0 ? spec.i2 : irsce::minPhase2Case2Pilots(c.m1, c.m2, c.n);
      const irsce::CascadedChannelSet cc = irsce::cascade(irsce::genChannels(c, 0));
      std::printf("phase 2 (case 2): M1=%d M2=%d N=%d I2=%d mode=%s\n", c.m1, c.m2, c.n, i2,
                  irsce::toString(spec.case2Mode));
      irsce::RankCertificate cert;
      try {
        const irsce::Phase2Schedule s = irsce::phase2DesignCase2(
            c.m1, c.m2, c.n, i2, spec.case2Mode, cc.qBar, spec.maxRetries, rng, &cert);
        schedule = irsce::toJson(s);
      } catch (const irsce::Error& e) {
        if (e.kind() != irsce::ErrorKind::DesignFailure) throw;
        pass = false;
      }
      std::printf("  rank(Xi) %ld of %ld after %d attempt(s), 1/cond %.3e %s\n",
                  static_cast<long>(cert.rank), static_cast<long>(cert.required), cert.attempts,
                  cert.inverseCondition, cert.passed() ? "ok" : "FAIL");
      pass = pass && cert.passed();
    }
  } else {
    if (c.k < 2) throw irsce::Error(irsce::ErrorKind::Config, "phase 3 needs k >= 2");
    const irsce::DesignCase dc = irsce::resolvePhase3Case(spec.phase3Case, c.n, c.m1, c.m2);
    const int i3 = spec.i3 > 0 ? spec.i3 : irsce::minPhase3Pilots(dc, c.k, c.m1, c.m2, c.n);
    const irsce::Phase3Schedule s =
        irsce::phase3Design(c.k, i3, c.m1, c.m2, c.n, spec.phase3Mode, rng, spec.phase3Case);
    std::printf("phase 3 (%s): K=%d I3=%d\n", irsce::toString(dc), c.k, i3);
    pass = report("X X^H = I3 I", irsce::orthogonalityDeviation(s.x, i3), tol);
    const irsce::CascadedChannelSet cc = irsce::cascade(irsce::genChannels(c, 0));
    const irsce::CMatrix xi3 = irsce::buildPhase3Xi(cc.users[0], s);
    const Eigen::Index rank = xi3.rows() >= xi3.cols() ? irsce::linalg::numericalRank(xi3) : 0;
    const bool ok = rank == xi3.cols();
    std::printf("  rank(Xi3) %ld of %ld %s\n", static_cast<long>(rank), static_cast<long>(xi3.cols()),
                ok ? "ok" : "FAIL");
    pass = pass && ok;
    schedule = irsce::toJson(s);
  }

  if (a.json && !schedule.is_null()) std::cout << schedule.dump(2) << '\n';
  std::cout << (pass ? "PASS" : "FAIL") << std::endl;
  return pass ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-IRS cascaded channel estimation experiments", "irsce"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* runCmd = app.add_subcommand("run", "run a Monte Carlo experiment spec");
  runCmd->add_option("--config", run.config, "experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  runCmd->add_option("--trials", run.trials, "override the trial count");
  runCmd->add_option("--seed", run.seed, "override the base seed");
  runCmd->add_option("--out", run.out, "CSV output path ('-' for stdout)");
  runCmd->add_flag("--serial", run.serial, "use the serial trial runner");

  OverheadArgs ov;
  CLI::App* ovCmd = app.add_subcommand("overhead", "minimum training overhead of a scheme");
  ovCmd->add_option("--scheme", ov.scheme, "proposed | decoupled | perAntenna")->required();
  ovCmd->add_option("--n", ov.n, "BS antennas")->required();
  ovCmd->add_option("--m1", ov.m1, "IRS 1 subsurfaces")->required();
  ovCmd->add_option("--m2", ov.m2, "IRS 2 subsurfaces")->required();
  ovCmd->add_option("--k", ov.k, "users")->required();
  ovCmd->add_flag("--phases", ov.phases, "per-phase breakdown (proposed only)");

  VerifyArgs vf;
  CLI::App* designCmd = app.add_subcommand("design", "training-design tools");
  designCmd->require_subcommand(1);
  CLI::App* verifyCmd = designCmd->add_subcommand("verify", "check a phase's design certificates");
  verifyCmd->add_option("--phase", vf.phase, "1, 2 or 3")->required()->check(CLI::IsMember({1, 2, 3}));
  verifyCmd->add_option("--config", vf.config, "experiment spec supplying sizes")->check(CLI::ExistingFile);
  verifyCmd->add_flag("--json", vf.json, "print the schedule as JSON");

  app.add_subcommand("version", "print the version");

  if (argc < 2) {
    std::cerr << app.help();
    return kExitConfig;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (runCmd->parsed()) return cmdRun(run);
    if (ovCmd->parsed()) return cmdOverhead(ov);
    if (verifyCmd->parsed()) return cmdVerify(vf);
    std::cout << "irsce " << kVersion << '\n';
    return 0;
  } catch (const irsce::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
