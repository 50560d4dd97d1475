#include "irsce/benchmarks.hpp"
#include "irsce/linalg.hpp"
#include "irsce/serialization.hpp"
#include "irsce/training_design.hpp"

#include <doctest.h>

#include <cmath>

using namespace irsce;

namespace {

const cd kJ{0.0, 1.0};

cd omegaPow(int p, int n) { return std::exp(-2.0 * kPi * kJ * static_cast<double>(p) / static_cast<double>(n)); }

double maxModulusDeviation(const CMatrix& m) {
  return (m.cwiseAbs().array() - 1.0).abs().maxCoeff();
}

int expectKind(ErrorKind kind, const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK((e.kind() == kind));
    return 1;
  }
  FAIL("expected an error");
  return 0;
}

}  // namespace

TEST_CASE("dft") {
  CHECK(dft(1) == CMatrix::Ones(1, 1));
  const CMatrix w2 = dft(2);
  CHECK(std::abs(w2(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(w2(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(w2(1, 0) - 1.0) < 1e-15);
  CHECK(std::abs(w2(1, 1) + 1.0) < 1e-15);
  CHECK(orthogonalityDeviation(dft(4), 4.0) < 1e-12);
  const CMatrix w5 = dft(5);
  for (int p = 0; p < 5; ++p)
    for (int q = 0; q < 5; ++q) CHECK(std::abs(w5(p, q) - omegaPow(p * q, 5)) < 1e-14);
  CHECK(orthogonalityDeviation(dft(4096).topRows(3), 4096.0) < 1e-10);
  expectKind(ErrorKind::InvalidArgument, [] { dft(0); });
}

TEST_CASE("DFT row products shift the row index") {
  // Elementwise product of DFT rows p and q is row (p + q) mod n; the Case 1
  // construction relies on this for p = 1..M1, q = M1 + 1.
  for (int m1 : {1, 3, 8}) {
    const int n = 2 * m1 + 1 + m1 % 2;
    const CMatrix w = dft(n);
    for (int r = 1; r <= m1; ++r) {
      const CMatrix prod = w.row(r).cwiseProduct(w.row(m1 + 1));
      CHECK((prod - w.row((r + m1 + 1) % n)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("Zadoff-Chu sequences have ideal periodic autocorrelation") {
  for (int len : {5, 7, 8, 13}) {
    const CVector zc = zadoffChu(len);
    CHECK(maxModulusDeviation(zc) < 1e-14);
    for (int shift = 1; shift < len; ++shift) {
      cd acc = 0.0;
      for (int i = 0; i < len; ++i) acc += zc(i) * std::conj(zc((i + shift) % len));
      CHECK(std::abs(acc) < 1e-10);
    }
  }
}

TEST_CASE("Phase I design") {
  const Phase1Schedule s = phase1Design(1, 2);
  CHECK((s.thetaBar2 - dft(2)).cwiseAbs().maxCoeff() < 1e-15);
  const Phase1Schedule big = phase1Design(20, 24);
  CHECK(big.thetaBar2.rows() == 21);
  CHECK(orthogonalityDeviation(big.thetaBar2, 24.0) < 1e-10);
  CHECK((big.thetaBar2.row(0).array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK(maxModulusDeviation(big.thetaBar2) < 1e-14);
  expectKind(ErrorKind::InsufficientPilots, [] { phase1Design(2, 2); });

  Rng rng(3);
  const Phase1Schedule r = phase1RandomDesign(4, 9, rng);
  CHECK((r.thetaBar2.row(0).array() - 1.0).abs().maxCoeff() == 0.0);
  CHECK(maxModulusDeviation(r.thetaBar2) < 1e-14);
  CHECK(linalg::numericalRank(r.thetaBar2) == 5);
}

TEST_CASE("Phase II Case 1: the three-symbol example") {
  const Phase2Schedule s = phase2DesignCase1(1, 3);
  const cd w = omegaPow(1, 3);
  CHECK(std::abs(s.theta1(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(s.theta1(0, 1) - w) < 1e-14);
  CHECK(std::abs(s.theta1(0, 2) - w * w) < 1e-14);
  CHECK(std::abs(s.psi(0) - 1.0) < 1e-14);
  CHECK(std::abs(s.psi(1) - w * w) < 1e-14);
  CHECK(std::abs(s.psi(2) - std::pow(w, 4)) < 1e-14);
  const CMatrix d = dft(3);
  CHECK((s.omega.row(0) - d.row(2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((s.omega.row(1) - d.row(0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((s.omega.row(2) - d.row(1)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(orthogonalityDeviation(s.omega, 3.0) < 1e-14);
}

TEST_CASE("Phase II Case 1 conditions") {
  const Phase2Schedule s = phase2DesignCase1(20, 42, 3);
  const Phase2ConditionReport r = verifyPhase2Conditions(s.theta1, s.psi, 1e-10);
  CHECK(r.pass());
  CHECK(orthogonalityDeviation(s.omega, 42.0) < 1e-10);
  CHECK(maxModulusDeviation(s.theta1) < 1e-14);
  CHECK(maxModulusDeviation(s.theta2) < 1e-14);
  // theta2 is the common phase on every subsurface.
  for (int i = 0; i < s.i2; ++i)
    CHECK((s.theta2.col(i).array() - s.psi(i)).abs().maxCoeff() < 1e-15);
  expectKind(ErrorKind::InsufficientPilots, [] { phase2DesignCase1(4, 8); });
}

TEST_CASE("heuristic and random Phase II designs violate the conditions") {
  const Phase2Schedule h = phase2HeuristicDesign(4, 9);
  const Phase2ConditionReport rh = verifyPhase2Conditions(h.theta1, h.psi);
  CHECK_FALSE(rh.pass());
  CHECK(rh.zeroRowSum == doctest::Approx(9.0));
  // psi^H repeats as the first row of Theta1 diag(psi^H).
  CHECK(linalg::numericalRank(h.omega) < h.omega.rows());

  Rng rng(8);
  const Phase2Schedule r = phase2RandomDesign(4, 9, 1, rng);
  CHECK(verifyPhase2Conditions(r.theta1, r.psi).orthogonality > 1e-3);
  CHECK(maxModulusDeviation(r.omega) < 1e-14);
}

TEST_CASE("Phase I and II certificates over random sizes") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int m1 = 1 + static_cast<int>(rng.uniform() * 30);
    const int m2 = 1 + static_cast<int>(rng.uniform() * 30);
    const int i1 = m2 + 1 + static_cast<int>(rng.uniform() * 40);
    const int i2 = 2 * m1 + 1 + static_cast<int>(rng.uniform() * 40);
    CAPTURE(m1);
    CAPTURE(i2);
    CHECK(orthogonalityDeviation(phase1Design(m2, i1).thetaBar2, i1) <= 1e-10);
    const Phase2Schedule s = phase2DesignCase1(m1, i2, m2);
    CHECK(verifyPhase2Conditions(s.theta1, s.psi, 1e-10).pass());
    CHECK(orthogonalityDeviation(s.omega, i2) <= 1e-10);
  }
}

TEST_CASE("Phase II Case 2 schedules") {
  CHECK(minPhase2Case2Pilots(1, 2, 1) == 5);
  CHECK(minPhase2Case2Pilots(8, 8, 4) == 26);
  CHECK(minPhase2Case2Pilots(20, 20, 10) == 62);
  // With N >= M2 the Q-bar subspace caps the useful dimension at M2.
  CHECK(minPhase2Case2Pilots(4, 6, 10) == 9);
  CHECK(minPhase2Case2Pilots(4, 6, 6) == 9);
  Rng rng(1);
  const Phase2Schedule s = phase2DesignCase2(1, 2, 1, 5, ScheduleMode::Random, rng);
  CHECK((s.caseTag == DesignCase::Case2));
  CHECK(s.theta1.cols() == 5);
  CHECK(s.theta2.rows() == 2);
  expectKind(ErrorKind::InsufficientPilots, [&] { phase2DesignCase2(1, 2, 1, 4, ScheduleMode::Random, rng); });

  int passed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    const CMatrix qBar = r.complexGaussian(3, 6, 1.0);
    const int i2 = minPhase2Case2Pilots(4, 6, 3);
    const Phase2Schedule c2 = phase2DesignCase2(4, 6, 3, i2, ScheduleMode::Random, r);
    passed += verifyXiRank(qBar, c2).passed() ? 1 : 0;
  }
  CHECK(passed >= 99);

  // Structured schedules certify against generic Q-bar too.
  Rng r(5);
  for (auto [m1, m2, n] : {std::tuple{4, 6, 3}, std::tuple{8, 8, 4}, std::tuple{1, 2, 1}}) {
    const CMatrix qBar = r.complexGaussian(n, m2, 1.0);
    RankCertificate cert;
    const int i2 = minPhase2Case2Pilots(m1, m2, n);
    const Phase2Schedule st = phase2DesignCase2(m1, m2, n, i2, ScheduleMode::Structured, qBar, 1, r, &cert);
    CHECK(cert.passed());
    CHECK(maxModulusDeviation(st.theta1) < 1e-14);
    CHECK(maxModulusDeviation(st.theta2) < 1e-14);
  }
}

TEST_CASE("Case 2 certification reports the failing rank") {
  Rng rng(3);
  const CMatrix zeroQ = CMatrix::Zero(2, 3);
  RankCertificate cert;
  CHECK_THROWS_AS(phase2DesignCase2(2, 3, 2, 20, ScheduleMode::Random, zeroQ, 4, rng, &cert), Error);
  CHECK(cert.attempts == 4);
  CHECK(cert.rank == 4);  // only the R block (N M1 columns) survives
  CHECK(cert.required == 3 + 6 + 4);
  try {
    phase2DesignCase2(2, 3, 2, 20, ScheduleMode::Random, zeroQ, 2, rng);
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::DesignFailure));
    CHECK(std::string(e.what()).find("rank 4 of 13") != std::string::npos);
  }
}

TEST_CASE("case selection") {
  CHECK((resolvePhase2Case(CaseSelect::Auto, 8, 8) == DesignCase::Case1));
  CHECK((resolvePhase2Case(CaseSelect::Auto, 4, 8) == DesignCase::Case2));
  CHECK((resolvePhase2Case(CaseSelect::Case2, 16, 8) == DesignCase::Case2));
  expectKind(ErrorKind::CaseMismatch, [] { resolvePhase2Case(CaseSelect::Case1, 4, 8); });
  CHECK((resolvePhase3Case(CaseSelect::Auto, 16, 8, 8) == DesignCase::Case1));
  CHECK((resolvePhase3Case(CaseSelect::Auto, 15, 8, 8) == DesignCase::Case2));
  expectKind(ErrorKind::CaseMismatch, [] { resolvePhase3Case(CaseSelect::Case1, 15, 8, 8); });
}

TEST_CASE("Phase III design") {
  Rng rng(4);
  const Phase3Schedule a = phase3Design(2, 1, 3, 3, 8, ScheduleMode::Random, rng);
  CHECK(a.x.rows() == 1);
  CHECK(std::abs(a.x(0, 0) - 1.0) < 1e-15);
  const Phase3Schedule b = phase3Design(10, 9, 3, 3, 8, ScheduleMode::Random, rng);
  CHECK(orthogonalityDeviation(b.x, 9.0) < 1e-10);
  CHECK(b.fixedReflections());
  CHECK(maxModulusDeviation(b.theta1) < 1e-14);
  expectKind(ErrorKind::InsufficientPilots, [&] { phase3Design(10, 8, 3, 3, 8, ScheduleMode::Random, rng); });

  CHECK(minPhase3Pilots(DesignCase::Case2, 3, 8, 8, 4) == 8);
  CHECK(minPhase3Pilots(DesignCase::Case2, 10, 20, 20, 10) == 36);
  CHECK(minPhase3Pilots(DesignCase::Case1, 1, 8, 8, 40) == 0);
  const Phase3Schedule c = phase3Design(3, 8, 8, 8, 4, ScheduleMode::Random, rng);
  CHECK((c.caseTag == DesignCase::Case2));
  CHECK_FALSE(c.fixedReflections());
  CHECK(maxModulusDeviation(c.theta2) < 1e-14);
  expectKind(ErrorKind::InsufficientPilots, [&] { phase3Design(3, 7, 8, 8, 4, ScheduleMode::Random, rng); });
  const Phase3Schedule st = phase3Design(3, 8, 8, 8, 4, ScheduleMode::Structured, rng);
  CHECK_FALSE(st.fixedReflections());
  CHECK(maxModulusDeviation(st.theta1) < 1e-14);
}

TEST_CASE("overhead: Table I cells") {
  CHECK(overhead(Scheme::Proposed, 45, 20, 20, 1) == 62);
  CHECK(overhead(Scheme::Decoupled, 45, 20, 20, 1) == 60);
  CHECK(overhead(Scheme::PerAntenna, 45, 20, 20, 1) == 440);
  CHECK(overhead(Scheme::PerAntenna, 45, 20, 20, 10) == 4400);
  CHECK(overhead(Scheme::Decoupled, 45, 20, 20, 10) == 78);
  CHECK(overhead(Scheme::Decoupled, 10, 20, 20, 1) == 80);
  CHECK(perAntennaOverhead(1, 1, 1) == 3);
  CHECK(decoupledOverhead(80, 20, 20, 1) == 60);
  expectKind(ErrorKind::Unsupported, [] { perAntennaOverhead(3, 4, 1); });

  const PhaseOverhead o = proposedOverhead(16, 8, 8, 1);
  CHECK(o.phase1 == 9);
  CHECK(o.phase2 == 17);
  CHECK(o.phase3 == 0);
  // In-text single-user bound 2 M1 + M2 + 2.
  for (int m1 = 1; m1 < 10; ++m1)
    for (int m2 = 1; m2 < 10; ++m2) CHECK(proposedOverhead(m2, m1, m2, 1).total() == 2 * m1 + m2 + 2);
}

TEST_CASE("overhead monotonicity") {
  for (int m : {4, 8, 20})
    for (int k = 1; k <= 12; ++k) {
      int prev = overhead(Scheme::Proposed, 1, m, m, k);
      for (int n = 2; n <= 3 * m; ++n) {
        const int cur = overhead(Scheme::Proposed, n, m, m, k);
        CHECK(cur <= prev);
        CHECK(cur <= overhead(Scheme::Proposed, n, m, m, k + 1));
        CHECK(cur <= overhead(Scheme::Proposed, n, m + 1, m, k));
        CHECK(cur <= overhead(Scheme::Proposed, n, m, m + 1, k));
        prev = cur;
      }
    }
}

TEST_CASE("schedule JSON round trip") {
  Phase1Schedule p1 = phase1Design(3, 5);
  p1.theta1Fixed = CVector::Ones(2);
  const Phase1Schedule b1 = phase1FromJson(nlohmann::json::parse(toJson(p1).dump()));
  CHECK(b1.thetaBar2 == p1.thetaBar2);
  CHECK(b1.theta1Fixed == p1.theta1Fixed);

  const Phase2Schedule p2 = phase2DesignCase1(2, 6, 3);
  const Phase2Schedule b2 = phase2FromJson(nlohmann::json::parse(toJson(p2).dump()));
  CHECK(b2.omega == p2.omega);
  CHECK(b2.psi == p2.psi);
  CHECK(b2.theta2 == p2.theta2);

  Rng rng(2);
  const Phase3Schedule p3 = phase3Design(3, 8, 8, 8, 4, ScheduleMode::Random, rng);
  const Phase3Schedule b3 = phase3FromJson(nlohmann::json::parse(toJson(p3).dump()));
  CHECK(b3.theta1 == p3.theta1);
  CHECK(b3.x == p3.x);
  CHECK((b3.caseTag == DesignCase::Case2));

  const nlohmann::json j = toJson(phase2DesignCase1(1, 3));
  CHECK(j["omega"][0][0].size() == 2);
}
