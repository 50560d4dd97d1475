#include "irsce/estimators.hpp"

#include "irsce/linalg.hpp"

#include <string>

namespace irsce {

using linalg::kron;
using linalg::lsSolve;

Phase1Estimate lsPhase1(const CMatrix& z1, const CMatrix& thetaBar2) {
  if (z1.cols() != thetaBar2.cols())
    throw Error(ErrorKind::DimensionMismatch, "Z1 and ThetaBar2 symbol counts differ");
  const CMatrix est = linalg::lsSolveRight(z1, thetaBar2, "ThetaBar2");
  return {est.col(0), est.rightCols(est.cols() - 1)};
}

CMatrix estimateCompositeF(const CMatrix& z2, const CMatrix& omega, RankPolicy policy) {
  if (z2.cols() != omega.cols())
    throw Error(ErrorKind::DimensionMismatch, "Z2 and Omega symbol counts differ");
  if (policy == RankPolicy::MinNorm) return linalg::lsSolveRightMinNorm(z2, omega);
  return linalg::lsSolveRight(z2, omega, "Omega");
}

Phase2Estimate lsPhase2Case1(const CMatrix& z2, const CMatrix& omega, const CMatrix& qBarHat,
                             RankPolicy policy) {
  const Eigen::Index m1 = (omega.rows() - 1) / 2;
  if (omega.rows() != 2 * m1 + 1) throw Error(ErrorKind::DimensionMismatch, "Omega must have 2 M1 + 1 rows");
  if (qBarHat.rows() != z2.rows()) throw Error(ErrorKind::DimensionMismatch, "Q-bar and Z2 row counts differ");
  if (qBarHat.rows() < qBarHat.cols() || linalg::numericalRank(qBarHat) < qBarHat.cols())
    throw Error(ErrorKind::CaseMismatch,
                "estimated Q-bar lacks full column rank; Phase II Case 2 is required");
  Phase2Estimate est;
  est.fHat = estimateCompositeF(z2, omega, policy);
  est.eHat = lsSolve(qBarHat, est.fHat.leftCols(m1 + 1), "Q-bar");
  est.rHat = est.fHat.rightCols(m1);
  return est;
}

CMatrix buildXi(const CMatrix& qBarHat, const CMatrix& theta1, const CMatrix& theta2) {
  const Eigen::Index n = qBarHat.rows(), m2 = qBarHat.cols();
  const Eigen::Index m1 = theta1.rows(), i2 = theta1.cols();
  if (theta2.rows() != m2 || theta2.cols() != i2)
    throw Error(ErrorKind::DimensionMismatch, "Phase II reflection sequences do not match Q-bar / each other");
  const Eigen::Index cols = m2 + m1 * m2 + n * m1;
  CMatrix xi(i2 * n, cols);
  const CMatrix identity = CMatrix::Identity(n, n);
  CVector augmented(m1 + 1);
  augmented(0) = 1.0;
  for (Eigen::Index i = 0; i < i2; ++i) {
    augmented.tail(m1) = theta1.col(i);
    const CMatrix weighted = qBarHat * theta2.col(i).asDiagonal();
    xi.block(i * n, 0, n, m2 * (m1 + 1)) = kron(augmented.transpose(), weighted);
    xi.block(i * n, m2 * (m1 + 1), n, n * m1) = kron(theta1.col(i).transpose(), identity);
  }
  return xi;
}

CMatrix buildXi(const CMatrix& qBarHat, const Phase2Schedule& schedule) {
  return buildXi(qBarHat, schedule.theta1, schedule.theta2);
}

Phase2Estimate lsPhase2Case2(const CVector& z2, const CMatrix& xi, int n, int m1, int m2) {
  const Eigen::Index eSize = static_cast<Eigen::Index>(m2) * (m1 + 1);
  if (xi.cols() != eSize + static_cast<Eigen::Index>(n) * m1)
    throw Error(ErrorKind::DimensionMismatch, "Xi column count does not match (N, M1, M2)");
  if (z2.size() != xi.rows()) throw Error(ErrorKind::DimensionMismatch, "z2 and Xi row counts differ");
  const CVector sol = lsSolve(xi, z2, "Xi");
  Phase2Estimate est;
  est.eHat = linalg::unvec(sol.head(eSize), m2, m1 + 1);
  est.rHat = linalg::unvec(sol.tail(static_cast<Eigen::Index>(n) * m1), n, m1);
  return est;
}

SingleUserRecovery recoverSingleUser(const CMatrix& qBarHat, const CMatrix& eHat) {
  if (eHat.rows() != qBarHat.cols())
    throw Error(ErrorKind::DimensionMismatch, "E rows must equal Q-bar columns");
  SingleUserRecovery rec;
  rec.rTildeHat = qBarHat * eHat.col(0).asDiagonal();
  for (Eigen::Index m = 1; m < eHat.cols(); ++m) rec.qHat.push_back(qBarHat * eHat.col(m).asDiagonal());
  return rec;
}

CMatrix buildB(const std::vector<CMatrix>& qHat, const CMatrix& rHat, const CMatrix& rTildeHat,
               const CVector& theta1, const CVector& theta2) {
  const Eigen::Index n = rHat.rows(), m1 = rHat.cols(), m2 = rTildeHat.cols();
  if (static_cast<Eigen::Index>(qHat.size()) != m1 || theta1.size() != m1 || theta2.size() != m2 ||
      rTildeHat.rows() != n)
    throw Error(ErrorKind::DimensionMismatch, "inconsistent dimensions for B");
  CMatrix b(n, m1 + m2);
  for (Eigen::Index m = 0; m < m1; ++m) {
    if (qHat[m].rows() != n || qHat[m].cols() != m2)
      throw Error(ErrorKind::DimensionMismatch, "Q_m must be N x M2");
    b.col(m) = (qHat[m] * theta2 + rHat.col(m)) * theta1(m);
  }
  b.rightCols(m2) = rTildeHat * theta2.asDiagonal();
  return b;
}

CMatrix lsPhase3Case1(const CMatrix& z3, const CMatrix& b, const CMatrix& x) {
  if (z3.rows() != b.rows() || z3.cols() != x.cols())
    throw Error(ErrorKind::DimensionMismatch, "Z3 must be N x I3");
  if (b.rows() < b.cols())
    throw Error(ErrorKind::CaseMismatch, "Phase III Case 1 needs N >= M1 + M2; use Case 2");
  const CMatrix right = linalg::lsSolveRight(z3, x, "X");
  return lsSolve(b, right, "B");
}

CMatrix buildPhase3Xi(const UserCsi& reference, const Phase3Schedule& schedule) {
  const Eigen::Index n = reference.r.rows();
  const Eigen::Index m = reference.r.cols() + reference.rTilde.cols();
  const Eigen::Index users = schedule.x.rows();
  CMatrix xi(schedule.i3 * n, users * m);
  for (int i = 0; i < schedule.i3; ++i) {
    const CMatrix b = buildB(reference.q, reference.r, reference.rTilde, schedule.theta1.col(i),
                             schedule.theta2.col(i));
    xi.middleRows(i * n, n) = kron(schedule.x.col(i).transpose(), b);
  }
  return xi;
}

CMatrix lsPhase3Stacked(const CVector& z3, const CMatrix& xi3, int m1PlusM2, int usersMinusOne) {
  if (xi3.cols() != static_cast<Eigen::Index>(m1PlusM2) * usersMinusOne)
    throw Error(ErrorKind::DimensionMismatch, "Xi3 column count does not match (M1 + M2)(K - 1)");
  if (z3.size() != xi3.rows()) throw Error(ErrorKind::DimensionMismatch, "z3 and Xi3 row counts differ");
  return linalg::unvec(lsSolve(xi3, z3, "Xi3"), m1PlusM2, usersMinusOne);
}

CMatrix lsPhase3Case2(const CVector& z3, const CMatrix& x, const CMatrix& b) {
  return lsPhase3Stacked(z3, kron(x.transpose(), b), static_cast<int>(b.cols()),
                         static_cast<int>(x.rows()));
}

std::vector<UserCsi> recoverMultiUser(const UserCsi& reference, const CMatrix& lambdaHat) {
  const Eigen::Index m1 = reference.r.cols(), m2 = reference.rTilde.cols();
  if (lambdaHat.rows() != m1 + m2)
    throw Error(ErrorKind::DimensionMismatch, "Lambda must have M1 + M2 rows");
  std::vector<UserCsi> out;
  out.reserve(lambdaHat.cols());
  for (Eigen::Index k = 0; k < lambdaHat.cols(); ++k) {
    const CVector bk = lambdaHat.col(k).head(m1);
    const CVector bTildeK = lambdaHat.col(k).tail(m2);
    UserCsi csi;
    csi.r = reference.r * bk.asDiagonal();
    csi.rTilde = reference.rTilde * bTildeK.asDiagonal();
    for (Eigen::Index m = 0; m < m1; ++m) csi.q.push_back(reference.q[m] * bk(m));
    out.push_back(std::move(csi));
  }
  return out;
}

double theoreticalMsePhase1(const CMatrix& thetaBar2, double sigma2) {
  return sigma2 / static_cast<double>(thetaBar2.rows()) * linalg::traceInverseGram(thetaBar2);
}

double theoreticalMsePhase2Case1(const CMatrix& omega, double sigma2) {
  return sigma2 / static_cast<double>(omega.rows()) * linalg::traceInverseGram(omega);
}

double theoreticalMsePhase2Case2(const CMatrix& xi, double sigma2) {
  if (xi.rows() < xi.cols()) throw Error(ErrorKind::UndefinedMse, "Xi has fewer rows than unknowns");
  return sigma2 / static_cast<double>(xi.cols()) * linalg::traceInverseGram(xi);
}

double theoreticalMsePhase3(const CMatrix& x, const CMatrix& b, double sigma2) {
  if (b.rows() < b.cols()) throw Error(ErrorKind::UndefinedMse, "B lacks full column rank (N < M1 + M2)");
  if (x.rows() > x.cols()) throw Error(ErrorKind::UndefinedMse, "X lacks full row rank (I3 < K - 1)");
  const double unknowns = static_cast<double>(x.rows() * b.cols());
  return sigma2 / unknowns * linalg::traceInverseGram(x) * linalg::traceInverseGram(b);
}

double theoreticalMsePhase3Stacked(const CMatrix& xi3, double sigma2) {
  if (xi3.rows() < xi3.cols()) throw Error(ErrorKind::UndefinedMse, "Xi3 has fewer rows than unknowns");
  return sigma2 / static_cast<double>(xi3.cols()) * linalg::traceInverseGram(xi3);
}

double normalizedMse(const CMatrix& estimate, const CMatrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw Error(ErrorKind::DimensionMismatch, "estimate and truth shapes differ");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw Error(ErrorKind::InvalidArgument, "normalized MSE of a zero channel");
  return (estimate - truth).squaredNorm() / denom / static_cast<double>(truth.size());
}

double normalizedMse(const std::vector<CMatrix>& estimate, const std::vector<CMatrix>& truth) {
  if (estimate.size() != truth.size())
    throw Error(ErrorKind::DimensionMismatch, "estimate and truth set sizes differ");
  double err = 0.0, denom = 0.0, entries = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (estimate[i].rows() != truth[i].rows() || estimate[i].cols() != truth[i].cols())
      throw Error(ErrorKind::DimensionMismatch, "estimate and truth shapes differ");
    err += (estimate[i] - truth[i]).squaredNorm();
    denom += truth[i].squaredNorm();
    entries += static_cast<double>(truth[i].size());
  }
  if (!(denom > 0.0)) throw Error(ErrorKind::InvalidArgument, "normalized MSE of a zero channel");
  return err / denom / entries;
}

int EstimateReport::totalPilots() const {
  int total = 0;
  for (const auto& [name, count] : pilotsUsed) total += count;
  return total;
}

}  // namespace irsce
