#include "irsce/benchmarks.hpp"

#include "irsce/linalg.hpp"
#include "irsce/training_design.hpp"

#include <algorithm>
#include <string>

namespace irsce {

namespace {

int ceilDiv(int a, int b) { return (a + b - 1) / b; }

void requirePositive(int n, int m1, int m2, int k) {
  if (n < 1 || m1 < 1 || m2 < 1 || k < 1)
    throw Error(ErrorKind::InvalidArgument, "overhead arguments must be positive");
}

}  // namespace

DecoupledStageMinima decoupledMinima(int n, int m1, int m2, int k) {
  requirePositive(n, m1, m2, k);
  DecoupledStageMinima s;
  s.a = m1;
  s.b = m2;
  s.c = n >= m2 ? m1 : ceilDiv(m1 * m2, n);
  if (k > 1) {
    s.d = n >= m1 ? k - 1 : std::max(k - 1, ceilDiv((k - 1) * m1, n));
    s.e = n >= m2 ? k - 1 : std::max(k - 1, ceilDiv((k - 1) * m2, n));
  }
  return s;
}

DecoupledStageMinima decoupledSplit(int n, int m1, int m2, int k, int singleUserBudget,
                                    int multiUserBudget) {
  DecoupledStageMinima s = decoupledMinima(n, m1, m2, k);
  // Equal A/B time first, then the remainder round-robin.
  const int ab = std::max(s.a, s.b);
  int extra = singleUserBudget > 0 ? singleUserBudget - (2 * ab + s.c) : 0;
  if (extra < 0)
    throw Error(ErrorKind::InsufficientPilots,
                "decoupled single-user budget " + std::to_string(singleUserBudget) +
                    " is below the stage minima " + std::to_string(2 * ab + s.c));
  s.a = s.b = ab;
  for (int i = 0; extra > 0; ++i, --extra) {
    if (i % 3 == 0) ++s.a;
    else if (i % 3 == 1) ++s.b;
    else ++s.c;
  }
  if (k > 1) {
    int extraMu = multiUserBudget > 0 ? multiUserBudget - (s.d + s.e) : 0;
    if (extraMu < 0)
      throw Error(ErrorKind::InsufficientPilots,
                  "decoupled multi-user budget " + std::to_string(multiUserBudget) +
                      " is below the stage minima " + std::to_string(s.d + s.e));
    for (int i = 0; extraMu > 0; ++i, --extraMu) (i % 2 == 0 ? s.d : s.e) += 1;
  }
  return s;
}

DecoupledSchedule decoupledDesign(int n, int m1, int m2, int k, int singleUserBudget,
                                  int multiUserBudget, Rng& rng) {
  const DecoupledStageMinima s = decoupledSplit(n, m1, m2, k, singleUserBudget, multiUserBudget);
  DecoupledSchedule d;
  d.thetaA = dft(s.a).topRows(m1);
  d.thetaB = dft(s.b).topRows(m2);
  if (n >= m2) {
    d.thetaC1 = dft(s.c).topRows(m1);
    d.thetaC2 = CMatrix::Ones(m2, s.c);
  } else {
    d.thetaC1 = rng.unitPhasors(m1, s.c);
    d.thetaC2 = rng.unitPhasors(m2, s.c);
  }
  if (k > 1) {
    d.xD = dft(s.d).topRows(k - 1);
    d.thetaD = n >= m1 ? CMatrix(CMatrix::Ones(m1, s.d)) : CMatrix(rng.unitPhasors(m1, s.d));
    d.xE = dft(s.e).topRows(k - 1);
    d.thetaE = n >= m2 ? CMatrix(CMatrix::Ones(m2, s.e)) : CMatrix(rng.unitPhasors(m2, s.e));
  } else {
    d.xD.resize(0, 0);
    d.thetaD.resize(m1, 0);
    d.xE.resize(0, 0);
    d.thetaE.resize(m2, 0);
  }
  return d;
}

namespace {

/// Received signals of a single user (or of users 2..K weighted by `x`) with
/// per-symbol reflections.
CMatrix observe(const CascadedChannelSet& cc, const CMatrix& theta1, const CMatrix& theta2,
                const CMatrix* x, double sigma2, Rng& rng) {
  const Eigen::Index symbols = theta1.cols();
  CMatrix z(cc.n(), symbols);
  for (Eigen::Index i = 0; i < symbols; ++i) {
    const ReflectionState refl{theta1.col(i), theta2.col(i)};
    CVector clean = CVector::Zero(cc.n());
    if (x == nullptr) {
      clean = effectiveChannel(cc, 0, refl);
    } else {
      for (int k = 1; k < cc.k(); ++k) clean += effectiveChannel(cc, k, refl) * (*x)(k - 1, i);
    }
    z.col(i) = receive(clean, 1.0, sigma2, rng);
  }
  return z;
}

/// LS estimate of S in z^(i) = A diag(theta^(i)) S x^(i) + v, where S has one
/// column per pilot stream.
CMatrix scalingLs(const CMatrix& z, const CMatrix& a, const CMatrix& theta, const CMatrix& x,
                  const char* what) {
  const Eigen::Index n = a.rows(), m = a.cols(), streams = x.rows(), symbols = theta.cols();
  bool fixed = true;
  for (Eigen::Index i = 1; i < symbols; ++i) fixed = fixed && theta.col(i) == theta.col(0);
  if (fixed && n >= m) {
    const CMatrix right = linalg::lsSolveRight(z, x, what);
    return linalg::lsSolve(a * theta.col(0).asDiagonal(), right, what);
  }
  CMatrix xi(symbols * n, streams * m);
  for (Eigen::Index i = 0; i < symbols; ++i)
    xi.middleRows(i * n, n) = linalg::kron(x.col(i).transpose(), a * theta.col(i).asDiagonal());
  return linalg::unvec(linalg::lsSolve(xi, linalg::vec(z), what), m, streams);
}

}  // namespace

EstimateReport decoupledEstimate(const CascadedChannelSet& cc, const DecoupledSchedule& s,
                                 double sigma2, Rng& rng, const DecoupledOptions& options) {
  const int m1 = cc.m1(), m2 = cc.m2(), k = cc.k();
  if (s.thetaA.rows() != m1 || s.thetaB.rows() != m2 || s.thetaC1.rows() != m1 ||
      s.thetaC2.rows() != m2)
    throw Error(ErrorKind::DimensionMismatch, "decoupled schedule does not match the IRS sizes");
  EstimateReport rep;
  rep.scheme = toString(Scheme::Decoupled);

  // Stage A: IRS 2 OFF, z = R theta1.
  const CMatrix zA = observe(cc, s.thetaA, CMatrix::Zero(m2, s.iA()), nullptr, sigma2, rng);
  rep.rHat = linalg::lsSolveRight(zA, s.thetaA, "stage A training");
  rep.pilotsUsed.emplace_back("stageA", s.iA());
  rep.theoreticalMse.emplace_back("stageA", sigma2 / m1 * linalg::traceInverseGram(s.thetaA));

  // Stage B: IRS 1 OFF, z = R~ theta2.
  const CMatrix zB = observe(cc, CMatrix::Zero(m1, s.iB()), s.thetaB, nullptr, sigma2, rng);
  rep.rTildeHat = linalg::lsSolveRight(zB, s.thetaB, "stage B training");
  rep.pilotsUsed.emplace_back("stageB", s.iB());
  rep.theoreticalMse.emplace_back("stageB", sigma2 / m2 * linalg::traceInverseGram(s.thetaB));

  // Stage C: both ON; the residual R~ diag(theta2) C theta1 carries the
  // double-reflection channel, Q_m = R~ diag(c_m).
  const CMatrix zC = observe(cc, s.thetaC1, s.thetaC2, nullptr, sigma2, rng);
  const CMatrix residual = zC - rep.rHat * s.thetaC1 - rep.rTildeHat * s.thetaC2;
  const CMatrix cHat = scalingLs(residual, rep.rTildeHat, s.thetaC2, s.thetaC1, "stage C training");
  for (int m = 0; m < m1; ++m) rep.qHat.push_back(rep.rTildeHat * cHat.col(m).asDiagonal());
  rep.pilotsUsed.emplace_back("stageC", s.iC());
  rep.users.push_back({rep.rHat, rep.rTildeHat, rep.qHat});

  if (k >= 2) {
    const UserCsi& reference = options.perfectReference ? cc.users[0] : rep.users[0];
    // Stage D: IRS 2 OFF, z = R_1 diag(theta1) [b_2..b_K] x.
    const CMatrix zD = observe(cc, s.thetaD, CMatrix::Zero(m2, s.iD()), &s.xD, sigma2, rng);
    const CMatrix bHat = scalingLs(zD, reference.r, s.thetaD, s.xD, "stage D training");
    // Stage E: IRS 1 OFF, z = R~_1 diag(theta2) [b~_2..b~_K] x.
    const CMatrix zE = observe(cc, CMatrix::Zero(m1, s.iE()), s.thetaE, &s.xE, sigma2, rng);
    const CMatrix bTildeHat = scalingLs(zE, reference.rTilde, s.thetaE, s.xE, "stage E training");
    rep.lambdaHat.resize(m1 + m2, k - 1);
    rep.lambdaHat.topRows(m1) = bHat;
    rep.lambdaHat.bottomRows(m2) = bTildeHat;
    rep.pilotsUsed.emplace_back("stageD", s.iD());
    rep.pilotsUsed.emplace_back("stageE", s.iE());
    for (UserCsi& u : recoverMultiUser(reference, rep.lambdaHat)) rep.users.push_back(std::move(u));
  }
  return rep;
}

int decoupledOverhead(int n, int m1, int m2, int k) {
  const DecoupledStageMinima s = decoupledMinima(n, m1, m2, k);
  return s.a + s.b + s.c + s.d + s.e;
}

int perAntennaOverhead(int m1, int m2, int k) {
  if (m1 < 1 || m2 < 1 || k < 1) throw Error(ErrorKind::InvalidArgument, "overhead arguments must be positive");
  if (m1 != m2)
    throw Error(ErrorKind::Unsupported, "per-antenna overhead is only defined for M1 == M2");
  const int m = m1 + m2;
  return k * m + k * m * m / 4;
}

}  // namespace irsce
