#include "irsce/pipeline.hpp"

#include "irsce/linalg.hpp"

#include <algorithm>
#include <string>

namespace irsce {

CMatrix synthesizePhase1(const CascadedChannelSet& cc, const Phase1Schedule& schedule,
                         double sigma2, Rng& rng) {
  CMatrix z(cc.n(), schedule.i1);
  for (int i = 0; i < schedule.i1; ++i)
    z.col(i) = receive(effectiveChannel(cc, 0, schedule.reflection(i)), 1.0, sigma2, rng);
  return z;
}

CMatrix synthesizePhase2(const CascadedChannelSet& cc, const Phase2Schedule& schedule,
                         double sigma2, Rng& rng) {
  CMatrix z(cc.n(), schedule.i2);
  for (int i = 0; i < schedule.i2; ++i)
    z.col(i) = receive(effectiveChannel(cc, 0, schedule.reflection(i)), 1.0, sigma2, rng);
  return z;
}

CMatrix synthesizePhase3(const CascadedChannelSet& cc, const Phase3Schedule& schedule,
                         double sigma2, Rng& rng) {
  CMatrix z(cc.n(), schedule.i3);
  for (int i = 0; i < schedule.i3; ++i) {
    const ReflectionState refl = schedule.reflection(i);
    CVector clean = CVector::Zero(cc.n());
    for (int k = 1; k < cc.k(); ++k) clean += effectiveChannel(cc, k, refl) * schedule.x(k - 1, i);
    z.col(i) = receive(clean, 1.0, sigma2, rng);
  }
  return z;
}

CMatrix trueCompositeF(const CascadedChannelSet& cc) {
  CMatrix f(cc.n(), 2 * cc.m1() + 1);
  f.leftCols(cc.m1() + 1) = cc.qBar * cc.e;
  f.rightCols(cc.m1()) = cc.users[0].r;
  return f;
}

CMatrix trueLambda(const CascadedChannelSet& cc) {
  CMatrix lambda(cc.m1() + cc.m2(), cc.k() - 1);
  for (int k = 1; k < cc.k(); ++k) {
    lambda.col(k - 1).head(cc.m1()) = cc.b[k];
    lambda.col(k - 1).tail(cc.m2()) = cc.bTilde[k];
  }
  return lambda;
}

namespace {

Phase1Schedule makePhase1(const ProposedOptions& o, int m1, int m2, Rng& rng) {
  const int i1 = o.i1 > 0 ? o.i1 : m2 + 1;
  Phase1Schedule s = o.phase1Design == Phase1Design::Optimal ? phase1Design(m2, i1)
                                                             : phase1RandomDesign(m2, i1, rng);
  s.theta1Fixed = CVector::Ones(m1);
  return s;
}

Phase3Schedule makePhase3(const CascadedChannelSet& cc, const UserCsi& reference,
                          const ProposedOptions& o, Rng& rng, CMatrix& xi3) {
  const int n = cc.n(), m1 = cc.m1(), m2 = cc.m2(), k = cc.k();
  const DesignCase c = resolvePhase3Case(o.phase3Case, n, m1, m2);
  const int i3 = o.i3 > 0 ? o.i3 : minPhase3Pilots(c, k, m1, m2, n);
  if (c == DesignCase::Case1) return phase3Design(k, i3, m1, m2, n, o.phase3Mode, rng, o.phase3Case);

  // Case 2 identifiability depends on B^(i), hence on the reference CSI.
  const int attempts = o.phase3Mode == ScheduleMode::Random ? std::max(1, o.maxRetries) : 1;
  Eigen::Index lastRank = 0;
  for (int a = 0; a < attempts; ++a) {
    Phase3Schedule s = phase3Design(k, i3, m1, m2, n, o.phase3Mode, rng, o.phase3Case);
    xi3 = buildPhase3Xi(reference, s);
    lastRank = xi3.rows() >= xi3.cols() ? linalg::numericalRank(xi3) : 0;
    if (lastRank == xi3.cols()) return s;
  }
  throw Error(ErrorKind::DesignFailure, "no identifiable Phase III schedule after " +
                                            std::to_string(attempts) + " attempts (last rank " +
                                            std::to_string(lastRank) + ")");
}

}  // namespace

EstimateReport runProposed(const CascadedChannelSet& cc, const ProposedOptions& o, double sigma2,
                           Rng& rng) {
  const int n = cc.n(), m1 = cc.m1(), m2 = cc.m2(), k = cc.k();
  EstimateReport rep;
  rep.scheme = toString(Scheme::Proposed);

  // Phase I
  const Phase1Schedule s1 = makePhase1(o, m1, m2, rng);
  const Phase1Estimate p1 = lsPhase1(synthesizePhase1(cc, s1, sigma2, rng), s1.thetaBar2);
  rep.g1Hat = p1.g1Hat;
  rep.qBarHat = p1.qBarHat;
  rep.pilotsUsed.emplace_back("phase1", s1.i1);
  rep.theoreticalMse.emplace_back("phase1", theoreticalMsePhase1(s1.thetaBar2, sigma2));

  // Phase II
  const CMatrix& qBarRef = o.perfectPhase1 ? cc.qBar : rep.qBarHat;
  const DesignCase c2 = resolvePhase2Case(o.phase2Case, n, m2);
  rep.phase2Case = c2;
  if (c2 == DesignCase::Case1) {
    const int i2 = o.i2 > 0 ? o.i2 : 2 * m1 + 1;
    const Phase2Schedule s2 = phase2Case1Design(o.phase2Design, m1, i2, m2, rng);
    const RankPolicy policy =
        o.phase2Design == Phase2Design::Heuristic ? RankPolicy::MinNorm : RankPolicy::Strict;
    const Phase2Estimate p2 = lsPhase2Case1(synthesizePhase2(cc, s2, sigma2, rng), s2.omega, qBarRef, policy);
    rep.fHat = p2.fHat;
    rep.eHat = p2.eHat;
    rep.rHat = p2.rHat;
    rep.pilotsUsed.emplace_back("phase2", i2);
    if (linalg::numericalRank(s2.omega) == s2.omega.rows())
      rep.theoreticalMse.emplace_back("phase2", theoreticalMsePhase2Case1(s2.omega, sigma2));
  } else {
    const int i2 = o.i2 > 0 ? o.i2 : minPhase2Case2Pilots(m1, m2, n);
    const Phase2Schedule s2 = phase2DesignCase2(m1, m2, n, i2, o.case2Mode, qBarRef, o.maxRetries, rng);
    const CMatrix z2 = synthesizePhase2(cc, s2, sigma2, rng);
    const CMatrix xi = buildXi(qBarRef, s2);
    const Phase2Estimate p2 = lsPhase2Case2(linalg::vec(z2), xi, n, m1, m2);
    rep.eHat = p2.eHat;
    rep.rHat = p2.rHat;
    rep.pilotsUsed.emplace_back("phase2", i2);
    rep.theoreticalMse.emplace_back("phase2", theoreticalMsePhase2Case2(xi, sigma2));
  }

  SingleUserRecovery rec = recoverSingleUser(qBarRef, rep.eHat);
  rep.rTildeHat = rec.rTildeHat;
  rep.qHat = rec.qHat;
  rep.users.push_back({rep.rHat, rep.rTildeHat, rep.qHat});

  // Phase III
  if (k >= 2) {
    const UserCsi& reference = o.perfectReference ? cc.users[0] : rep.users[0];
    CMatrix xi3;
    const Phase3Schedule s3 = makePhase3(cc, reference, o, rng, xi3);
    rep.phase3Case = s3.caseTag;
    const CMatrix z3 = synthesizePhase3(cc, s3, sigma2, rng);
    if (s3.caseTag == DesignCase::Case1) {
      const CMatrix b = buildB(reference.q, reference.r, reference.rTilde, s3.theta1.col(0),
                               s3.theta2.col(0));
      rep.lambdaHat = lsPhase3Case1(z3, b, s3.x);
      rep.theoreticalMse.emplace_back("phase3", theoreticalMsePhase3(s3.x, b, sigma2));
    } else {
      rep.lambdaHat = lsPhase3Stacked(linalg::vec(z3), xi3, m1 + m2, k - 1);
      rep.theoreticalMse.emplace_back("phase3", theoreticalMsePhase3Stacked(xi3, sigma2));
    }
    rep.pilotsUsed.emplace_back("phase3", s3.i3);
    for (UserCsi& u : recoverMultiUser(reference, rep.lambdaHat)) rep.users.push_back(std::move(u));
  }
  return rep;
}

}  // namespace irsce
