#include "irsce/estimators.hpp"
#include "irsce/linalg.hpp"
#include "irsce/pipeline.hpp"

#include <doctest.h>

#include <cmath>

using namespace irsce;

namespace {

SystemConfig config(int n, int m1, int m2, int k) {
  SystemConfig c;
  c.n = n;
  c.m1 = m1;
  c.m2 = m2;
  c.k = k;
  return c;
}

// Unit path loss so that noise at sigma2 ~ 1e-2 is well below the signal.
SystemConfig unitConfig(int n, int m1, int m2, int k) {
  SystemConfig c = config(n, m1, m2, k);
  c.gamma0Db = 0.0;
  c.alphaNear = 0.0;
  c.alphaFar = 0.0;
  return c;
}

UserCsi scalarOnesCsi() {
  return {CMatrix::Ones(1, 1), CMatrix::Ones(1, 1), {CMatrix::Ones(1, 1)}};
}

double meanSquare(const CMatrix& err) { return err.squaredNorm() / static_cast<double>(err.size()); }

void checkAllUsers(const EstimateReport& rep, const CascadedChannelSet& cc, double tol) {
  REQUIRE(rep.users.size() == cc.users.size());
  for (std::size_t k = 0; k < cc.users.size(); ++k) {
    CAPTURE(k);
    CHECK(linalg::relativeError(rep.users[k].r, cc.users[k].r) <= tol);
    CHECK(linalg::relativeError(rep.users[k].rTilde, cc.users[k].rTilde) <= tol);
    for (std::size_t m = 0; m < cc.users[k].q.size(); ++m)
      CHECK(linalg::relativeError(rep.users[k].q[m], cc.users[k].q[m]) <= tol);
  }
}

}  // namespace

TEST_CASE("Phase I LS is exact without noise") {
  const CascadedChannelSet cc = cascade(genChannels(config(8, 8, 8, 1), 4));
  Rng rng(1);
  Phase1Schedule s = phase1Design(8, 12);
  s.theta1Fixed = CVector::Ones(8);
  const Phase1Estimate p = lsPhase1(synthesizePhase1(cc, s, 0.0, rng), s.thetaBar2);
  CHECK(linalg::relativeError(p.qBarHat, cc.qBar) < 1e-10);
  CHECK(linalg::relativeError(p.g1Hat, cc.g1) < 1e-10);
  // The data lies in the row space of ThetaBar2.
  const CMatrix z = synthesizePhase1(cc, s, 0.0, rng);
  CMatrix joint(8, 9);
  joint << p.g1Hat, p.qBarHat;
  CHECK(linalg::relativeError(joint * s.thetaBar2, z) < 1e-10);
}

TEST_CASE("buildXi: scalar all-ones example") {
  const CMatrix xi = buildXi(CMatrix::Constant(1, 1, cd(0.7, -0.2)), CMatrix::Ones(1, 3), CMatrix::Ones(1, 3));
  REQUIRE(xi.rows() == 3);
  REQUIRE(xi.cols() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(xi(i, 0) == cd(0.7, -0.2));
    CHECK(xi(i, 1) == cd(0.7, -0.2));
    CHECK(xi(i, 2) == cd(1.0));
  }
  Rng rng(2);
  const CMatrix zero = buildXi(CMatrix::Zero(3, 4), rng.unitPhasors(2, 10), rng.unitPhasors(4, 10));
  CHECK(zero.leftCols(4 + 2 * 4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.rows() == 30);
  CHECK(zero.cols() == 4 + 8 + 6);
  CHECK_THROWS_AS(buildXi(CMatrix::Zero(3, 4), rng.unitPhasors(2, 10), rng.unitPhasors(4, 9)), Error);
}

TEST_CASE("buildXi matches the per-symbol signal model") {
  const CascadedChannelSet cc = cascade(genChannels(unitConfig(3, 2, 5, 1), 9));
  Rng rng(3);
  const int i2 = minPhase2Case2Pilots(2, 5, 3);
  const Phase2Schedule s = phase2DesignCase2(2, 5, 3, i2, ScheduleMode::Random, rng);
  const CMatrix xi = buildXi(cc.qBar, s);
  CVector unknown(xi.cols());
  unknown << linalg::vec(cc.e), linalg::vec(cc.users[0].r);
  CHECK(linalg::relativeError(xi * unknown, linalg::vec(synthesizePhase2(cc, s, 0.0, rng))) < 1e-12);
  CHECK(linalg::numericalRank(xi) == xi.cols());
}

TEST_CASE("Phase II Case 2 LS edge cases") {
  Rng rng(4);
  const CMatrix qBar = rng.complexGaussian(2, 3, 1.0);
  const Phase2Schedule s = phase2DesignCase2(2, 3, 2, minPhase2Case2Pilots(2, 3, 2), ScheduleMode::Random, rng);
  const CMatrix xi = buildXi(qBar, s);
  const Phase2Estimate zero = lsPhase2Case2(CVector::Zero(xi.rows()), xi, 2, 2, 3);
  CHECK(zero.eHat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.rHat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.eHat.rows() == 3);
  CHECK(zero.eHat.cols() == 3);
  CHECK(zero.rHat.cols() == 2);
  CMatrix deficient = xi;
  deficient.col(5) = deficient.col(1);
  CHECK_THROWS_AS(lsPhase2Case2(CVector::Zero(xi.rows()), deficient, 2, 2, 3), Error);
}

TEST_CASE("recoverSingleUser") {
  const CascadedChannelSet cc = cascade(genChannels(config(4, 3, 4, 1), 2));
  const SingleUserRecovery r = recoverSingleUser(cc.qBar, cc.e);
  CHECK(linalg::relativeError(r.rTildeHat, cc.users[0].rTilde) < 1e-12);
  for (int m = 0; m < 3; ++m) CHECK(linalg::relativeError(r.qHat[m], cc.users[0].q[m]) < 1e-12);
  const SingleUserRecovery z = recoverSingleUser(cc.qBar, CMatrix::Zero(4, 4));
  CHECK(z.rTildeHat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.qHat[2].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lsPhase2Case1 rejects a rank-deficient Q-bar estimate") {
  const Phase2Schedule s = phase2DesignCase1(2, 5, 3);
  CMatrix qBar = CMatrix::Ones(4, 3);
  try {
    lsPhase2Case1(CMatrix::Zero(4, 5), s.omega, qBar);
    FAIL("expected a case mismatch");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::CaseMismatch));
  }
}

TEST_CASE("buildB examples") {
  const UserCsi ones = scalarOnesCsi();
  const CMatrix b = buildB(ones.q, ones.r, ones.rTilde, CVector::Ones(1), CVector::Ones(1));
  CHECK(b(0, 0) == cd(2.0));
  CHECK(b(0, 1) == cd(1.0));

  const CascadedChannelSet cc = cascade(genChannels(config(5, 3, 4, 2), 6));
  const UserCsi& u = cc.users[0];
  Rng rng(7);
  const CVector t1 = rng.unitPhasors(3, 1), t2 = rng.unitPhasors(4, 1);
  const CMatrix bm = buildB(u.q, u.r, u.rTilde, t1, t2);
  for (int m = 0; m < 3; ++m) {
    const CVector expected = (u.q[m] * t2 + u.r.col(m)) * t1(m);
    CHECK(linalg::relativeError(bm.col(m), expected) < 1e-12);
  }
  CHECK(linalg::relativeError(bm.rightCols(4), u.rTilde * t2.asDiagonal()) < 1e-12);

  const cd phase = std::polar(1.0, 0.83);
  const CMatrix rotated = buildB(u.q, u.r, u.rTilde, t1 * phase, t2);
  CHECK(linalg::relativeError(rotated.leftCols(3), bm.leftCols(3) * phase) < 1e-12);
  CHECK(linalg::relativeError(rotated.rightCols(4), bm.rightCols(4)) < 1e-15);

  // Users 2..K see B Lambda for a fixed reflection.
  const CVector h2 = effectiveChannel(cc, 1, {t1, t2});
  CHECK(linalg::relativeError(bm * trueLambda(cc), h2) < 1e-12);
}

TEST_CASE("Phase III Case 1 and Case 2 agree") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int m1 = 1 + trial % 3, m2 = 1 + trial % 4, n = m1 + m2 + trial % 3, users = 1 + trial % 4;
    const CMatrix b = rng.complexGaussian(n, m1 + m2, 1.0);
    const int i3 = users + trial % 2;
    const CMatrix x = dft(i3).topRows(users);
    const CMatrix z = rng.complexGaussian(n, i3, 1.0);
    const CMatrix c1 = lsPhase3Case1(z, b, x);
    const CMatrix c2 = lsPhase3Case2(linalg::vec(z), x, b);
    CHECK(linalg::relativeError(c2, c1) < 1e-9);
  }
}

TEST_CASE("Phase III LS examples") {
  Rng rng(12);
  const CMatrix b = rng.complexGaussian(6, 4, 1.0);
  const CMatrix x = dft(3).topRows(2);
  const CMatrix lambda = rng.complexGaussian(4, 2, 1.0);
  CHECK(linalg::relativeError(lsPhase3Case1(b * lambda * x, b, x), lambda) < 1e-12);
  CHECK(linalg::relativeError(lsPhase3Case2(linalg::vec(b * lambda * x), x, b), lambda) < 1e-12);
  CHECK(lsPhase3Case2(CVector::Zero(18), x, b).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(lsPhase3Case1(CMatrix::Zero(3, 3), rng.complexGaussian(3, 4, 1.0), x), Error);

  // Identical users: every scaling is one.
  SystemConfig c = config(8, 2, 3, 3);
  ChannelRealization real = genChannels(c, 13);
  real.u[1] = real.u[2] = real.u[0];
  real.uTilde[1] = real.uTilde[2] = real.uTilde[0];
  const CascadedChannelSet cc = cascade(real);
  CHECK((trueLambda(cc).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("recoverMultiUser") {
  const CascadedChannelSet cc = cascade(genChannels(config(4, 3, 2, 3), 14));
  const std::vector<UserCsi> users = recoverMultiUser(cc.users[0], trueLambda(cc));
  REQUIRE(users.size() == 2);
  for (int k = 1; k < 3; ++k) {
    CHECK(linalg::relativeError(users[k - 1].r, cc.users[k].r) < 1e-12);
    CHECK(linalg::relativeError(users[k - 1].rTilde, cc.users[k].rTilde) < 1e-12);
    for (int m = 0; m < 3; ++m) CHECK(linalg::relativeError(users[k - 1].q[m], cc.users[k].q[m]) < 1e-12);
  }
  const std::vector<UserCsi> same = recoverMultiUser(cc.users[0], CMatrix::Ones(5, 1));
  CHECK(same[0].r == cc.users[0].r);
  CHECK(same[0].q[1] == cc.users[0].q[1]);
}

TEST_CASE("noiseless end-to-end recovery") {
  for (int n : {4, 16}) {
    for (auto mode : {ScheduleMode::Random, ScheduleMode::Structured}) {
      CAPTURE(n);
      const CascadedChannelSet cc = cascade(genChannels(config(n, 8, 8, 3), 21));
      ProposedOptions o;
      o.case2Mode = mode;
      o.phase3Mode = mode;
      Rng rng(5);
      const EstimateReport rep = runProposed(cc, o, 0.0, rng);
      CHECK((*rep.phase2Case == (n >= 8 ? DesignCase::Case1 : DesignCase::Case2)));
      CHECK((*rep.phase3Case == (n >= 16 ? DesignCase::Case1 : DesignCase::Case2)));
      checkAllUsers(rep, cc, 1e-8);
      CHECK(linalg::relativeError(rep.lambdaHat, trueLambda(cc)) < 1e-8);
      // The recovered channels superimpose back to Q-bar.
      CMatrix sum = rep.rTildeHat;
      for (const CMatrix& q : rep.qHat) sum += q;
      CHECK(linalg::relativeError(sum, rep.qBarHat) < 1e-9);
      CHECK(rep.totalPilots() == (n == 16 ? 9 + 17 + 2 : 9 + minPhase2Case2Pilots(8, 8, 4) + 8));
    }
  }
}

TEST_CASE("Case 2 Phase II equals Case 1 on noiseless data when N >= M2") {
  const CascadedChannelSet cc = cascade(genChannels(config(10, 4, 6, 1), 31));
  ProposedOptions o1, o2;
  o2.phase2Case = CaseSelect::Case2;
  Rng r1(1), r2(1);
  const EstimateReport a = runProposed(cc, o1, 0.0, r1);
  const EstimateReport b = runProposed(cc, o2, 0.0, r2);
  CHECK(linalg::relativeError(b.eHat, a.eHat) < 1e-8);
  CHECK(linalg::relativeError(b.rHat, a.rHat) < 1e-8);
}

TEST_CASE("theoretical MSE closed forms") {
  const double sigma2 = 0.3;
  CHECK(theoreticalMsePhase1(phase1Design(6, 11).thetaBar2, sigma2) == doctest::Approx(sigma2 / 11));
  CHECK(theoreticalMsePhase2Case1(phase2DesignCase1(5, 13).omega, sigma2) == doctest::Approx(sigma2 / 13));
  Rng rng(7);
  const CMatrix b = rng.complexGaussian(9, 5, 1.0);
  const CMatrix x = dft(4).topRows(3);
  const double oracle = sigma2 / (3 * 5) * (3.0 / 4.0) * (b.adjoint() * b).inverse().trace().real();
  CHECK(theoreticalMsePhase3(x, b, sigma2) == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(theoreticalMsePhase3Stacked(linalg::kron(x.transpose(), b), sigma2) ==
        doctest::Approx(oracle).epsilon(1e-10));

  // Any non-orthogonal Phase I design is worse than sigma2 / I1.
  for (int t = 0; t < 30; ++t) {
    const Phase1Schedule r = phase1RandomDesign(5, 9, rng);
    CHECK(theoreticalMsePhase1(r.thetaBar2, sigma2) > sigma2 / 9);
  }
  CHECK_THROWS_AS(theoreticalMsePhase2Case1(phase2HeuristicDesign(3, 7).omega, sigma2), Error);
}

TEST_CASE("normalizedMse examples") {
  Rng rng(8);
  const CMatrix t = rng.complexGaussian(4, 3, 1.0);
  CHECK(normalizedMse(t, t) == 0.0);
  CHECK(normalizedMse(CMatrix(2.0 * t), t) == doctest::Approx(1.0 / 12));
  CMatrix p = rng.complexGaussian(4, 3, 1.0);
  p *= 1e-2 * t.norm() / p.norm();
  CHECK(normalizedMse(CMatrix(t + p), t) == doctest::Approx(1e-4 / 12).epsilon(1e-10));
  CHECK_THROWS_AS(normalizedMse(t, CMatrix::Zero(4, 3)), Error);
  CHECK_THROWS_AS(normalizedMse(t, CMatrix::Ones(3, 4)), Error);
}

TEST_CASE("Monte Carlo MSE matches theory and scales with noise") {
  const int trials = 2000;
  const CascadedChannelSet cc = cascade(genChannels(unitConfig(4, 3, 3, 1), 17));
  const Phase2Schedule s2 = phase2DesignCase1(3, 9, 3);
  Phase1Schedule s1 = phase1Design(3, 6);
  s1.theta1Fixed = CVector::Ones(3);
  CMatrix f(4, 7);
  f << cc.qBar * cc.e, cc.users[0].r;
  CMatrix joint(4, 4);
  joint << cc.g1, cc.qBar;

  // Heuristic rows give a rank-deficient Omega; the min-norm fit is biased.
  const Phase2Schedule h2 = phase2HeuristicDesign(3, 9, 3);

  auto run = [&](double sigma2) {
    Rng rng(99);
    double e1 = 0.0, e2 = 0.0, eh = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Phase1Estimate p1 = lsPhase1(synthesizePhase1(cc, s1, sigma2, rng), s1.thetaBar2);
      CMatrix est(4, 4);
      est << p1.g1Hat, p1.qBarHat;
      e1 += meanSquare(est - joint);
      e2 += meanSquare(estimateCompositeF(synthesizePhase2(cc, s2, sigma2, rng), s2.omega) - f);
      eh += meanSquare(estimateCompositeF(synthesizePhase2(cc, h2, sigma2, rng), h2.omega, RankPolicy::MinNorm) - f);
    }
    return std::array<double, 3>{e1 / trials, e2 / trials, eh / trials};
  };
  const auto lo = run(0.01);
  CHECK(lo[0] == doctest::Approx(0.01 / 6).epsilon(0.05));
  CHECK(lo[1] == doctest::Approx(0.01 / 9).epsilon(0.05));
  CHECK(lo[2] > 0.01 / 9);
  const auto hi = run(0.02);
  CHECK(hi[0] / lo[0] == doctest::Approx(2.0).epsilon(0.08));
  CHECK(hi[1] / lo[1] == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("Monte Carlo Case 2 and Phase III MSE match the trace forms") {
  const int trials = 2000;
  const double sigma2 = 0.01;
  Rng rng(23);
  const CMatrix qBar = rng.complexGaussian(2, 4, 1.0);
  const Phase2Schedule s = phase2DesignCase2(2, 4, 2, minPhase2Case2Pilots(2, 4, 2) + 2, ScheduleMode::Random, rng);
  const CMatrix xi = buildXi(qBar, s);
  const CVector truth = rng.complexGaussian(xi.cols(), 1, 1.0);
  const CMatrix b = rng.complexGaussian(7, 5, 1.0);
  const CMatrix x = dft(3).topRows(2);
  const CMatrix lambda = rng.complexGaussian(5, 2, 1.0);

  double e2 = 0.0, e3 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const CVector z = xi * truth + rng.complexGaussian(xi.rows(), 1, sigma2);
    const Phase2Estimate p = lsPhase2Case2(z, xi, 2, 2, 4);
    CVector est(xi.cols());
    est << linalg::vec(p.eHat), linalg::vec(p.rHat);
    e2 += meanSquare(est - truth);
    const CMatrix z3 = b * lambda * x + rng.complexGaussian(7, 3, sigma2);
    e3 += meanSquare(lsPhase3Case1(z3, b, x) - lambda);
  }
  CHECK(e2 / trials == doctest::Approx(theoreticalMsePhase2Case2(xi, sigma2)).epsilon(0.05));
  CHECK(e3 / trials == doctest::Approx(theoreticalMsePhase3(x, b, sigma2)).epsilon(0.05));
}
