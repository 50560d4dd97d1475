#include "irsce/training_design.hpp"

#include "irsce/benchmarks.hpp"
#include "irsce/estimators.hpp"
#include "irsce/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace irsce {

const char* toString(DesignCase c) { return c == DesignCase::Case1 ? "case1" : "case2"; }

const char* toString(Phase1Design d) { return d == Phase1Design::Optimal ? "optimal" : "random"; }

const char* toString(Phase2Design d) {
  switch (d) {
    case Phase2Design::Optimal: return "optimal";
    case Phase2Design::Heuristic: return "heuristic";
    case Phase2Design::Random: return "random";
  }
  return "?";
}

const char* toString(ScheduleMode m) { return m == ScheduleMode::Random ? "random" : "structured"; }

const char* toString(Scheme s) {
  switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::Decoupled: return "decoupled";
    case Scheme::PerAntenna: return "perAntenna";
  }
  return "?";
}

Phase1Design parsePhase1Design(const std::string& s) {
  if (s == "optimal") return Phase1Design::Optimal;
  if (s == "random") return Phase1Design::Random;
  throw Error(ErrorKind::Config, "unknown Phase I design '" + s + "'");
}

Phase2Design parsePhase2Design(const std::string& s) {
  if (s == "optimal") return Phase2Design::Optimal;
  if (s == "heuristic") return Phase2Design::Heuristic;
  if (s == "random") return Phase2Design::Random;
  throw Error(ErrorKind::Config, "unknown Phase II design '" + s + "'");
}

ScheduleMode parseScheduleMode(const std::string& s) {
  if (s == "random") return ScheduleMode::Random;
  if (s == "structured") return ScheduleMode::Structured;
  throw Error(ErrorKind::Config, "unknown schedule mode '" + s + "'");
}

Scheme parseScheme(const std::string& s) {
  if (s == "proposed") return Scheme::Proposed;
  if (s == "decoupled") return Scheme::Decoupled;
  if (s == "perAntenna" || s == "per-antenna") return Scheme::PerAntenna;
  throw Error(ErrorKind::Config, "unknown scheme '" + s + "'");
}

CaseSelect parseCaseSelect(const std::string& s) {
  if (s == "auto") return CaseSelect::Auto;
  if (s == "case1") return CaseSelect::Case1;
  if (s == "case2") return CaseSelect::Case2;
  throw Error(ErrorKind::Config, "unknown case selection '" + s + "'");
}

ReflectionState Phase1Schedule::reflection(int i) const {
  return {theta1Fixed, thetaBar2.col(i).tail(thetaBar2.rows() - 1)};
}

ReflectionState Phase2Schedule::reflection(int i) const { return {theta1.col(i), theta2.col(i)}; }

bool Phase3Schedule::fixedReflections() const {
  for (Eigen::Index i = 1; i < theta1.cols(); ++i)
    if (theta1.col(i) != theta1.col(0) || theta2.col(i) != theta2.col(0)) return false;
  return true;
}

ReflectionState Phase3Schedule::reflection(int i) const { return {theta1.col(i), theta2.col(i)}; }

bool Phase2ConditionReport::pass() const {
  return orthogonality <= tol && zeroRowSum <= tol && psiOrthogonal <= tol && shiftedCross <= tol;
}

CMatrix dft(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "DFT size must be >= 1");
  CMatrix w(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      // Reduce the exponent first so large n keeps full phase accuracy.
      const long long r = (static_cast<long long>(p) * q) % n;
      const double a = -2.0 * kPi * static_cast<double>(r) / n;
      w(p, q) = {std::cos(a), std::sin(a)};
    }
  return w;
}

CVector zadoffChu(int len, int root) {
  if (len < 1) throw Error(ErrorKind::InvalidArgument, "Zadoff-Chu length must be >= 1");
  CVector s(len);
  for (int i = 0; i < len; ++i) {
    const long long num = (len % 2 == 1) ? static_cast<long long>(root) * i * (i + 1)
                                         : static_cast<long long>(root) * i * i;
    const double a = -kPi * static_cast<double>(num % (2LL * len)) / len;
    s(i) = {std::cos(a), std::sin(a)};
  }
  return s;
}

double orthogonalityDeviation(const CMatrix& a, double scale) {
  const CMatrix g = a * a.adjoint() - scale * CMatrix::Identity(a.rows(), a.rows());
  return g.cwiseAbs().maxCoeff();
}

Phase1Schedule phase1Design(int m2, int i1) {
  if (m2 < 1) throw Error(ErrorKind::InvalidArgument, "M2 must be >= 1");
  if (i1 < m2 + 1)
    throw Error(ErrorKind::InsufficientPilots,
                "Phase I needs I1 >= M2 + 1 = " + std::to_string(m2 + 1) + ", got " + std::to_string(i1));
  Phase1Schedule s;
  s.i1 = i1;
  s.thetaBar2 = dft(i1).topRows(m2 + 1);
  return s;
}

Phase1Schedule phase1RandomDesign(int m2, int i1, Rng& rng) {
  if (i1 < m2 + 1)
    throw Error(ErrorKind::InsufficientPilots, "Phase I needs I1 >= M2 + 1");
  Phase1Schedule s;
  s.i1 = i1;
  s.thetaBar2.resize(m2 + 1, i1);
  s.thetaBar2.row(0).setOnes();
  s.thetaBar2.bottomRows(m2) = rng.unitPhasors(m2, i1);
  return s;
}

CMatrix assembleOmega(const CMatrix& theta1, const CVector& psi) {
  if (theta1.cols() != psi.size())
    throw Error(ErrorKind::DimensionMismatch, "Theta1 and psi lengths differ");
  const Eigen::Index m1 = theta1.rows();
  CMatrix omega(2 * m1 + 1, theta1.cols());
  omega.row(0) = psi.transpose();
  omega.middleRows(1, m1) = theta1 * psi.asDiagonal();
  omega.bottomRows(m1) = theta1;
  return omega;
}

namespace {

void requirePhase2Case1Pilots(int m1, int i2) {
  if (m1 < 1) throw Error(ErrorKind::InvalidArgument, "M1 must be >= 1");
  if (i2 < 2 * m1 + 1)
    throw Error(ErrorKind::InsufficientPilots, "Phase II (Case 1) needs I2 >= 2 M1 + 1 = " +
                                                   std::to_string(2 * m1 + 1) + ", got " +
                                                   std::to_string(i2));
}

Phase2Schedule finishCase1(CMatrix theta1, CVector psi, int m2) {
  Phase2Schedule s;
  s.caseTag = DesignCase::Case1;
  s.i2 = static_cast<int>(theta1.cols());
  s.m2 = m2;
  s.omega = assembleOmega(theta1, psi);
  s.theta2 = CMatrix::Ones(m2, s.i2) * psi.asDiagonal();
  s.theta1 = std::move(theta1);
  s.psi = std::move(psi);
  return s;
}

CVector cyclicShift(const CVector& v, int shift) {
  const Eigen::Index n = v.size();
  CVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = v((i + shift) % n);
  return out;
}

}  // namespace

Phase2Schedule phase2DesignCase1(int m1, int i2, int m2) {
  requirePhase2Case1Pilots(m1, i2);
  const CMatrix w = dft(i2);
  // Moving row 0 to the end makes shifted row r equal to original row r + 1.
  CMatrix shifted(i2, i2);
  shifted.topRows(i2 - 1) = w.bottomRows(i2 - 1);
  shifted.row(i2 - 1) = w.row(0);
  return finishCase1(shifted.topRows(m1), shifted.row(m1).transpose(), m2);
}

Phase2Schedule phase2HeuristicDesign(int m1, int i2, int m2) {
  requirePhase2Case1Pilots(m1, i2);
  const CMatrix w = dft(i2);
  return finishCase1(w.topRows(m1), w.row(m1).transpose(), m2);
}

Phase2Schedule phase2RandomDesign(int m1, int i2, int m2, Rng& rng) {
  requirePhase2Case1Pilots(m1, i2);
  CMatrix theta1 = rng.unitPhasors(m1, i2);
  CVector psi = rng.unitPhasors(i2, 1);
  return finishCase1(std::move(theta1), std::move(psi), m2);
}

Phase2Schedule phase2Case1Design(Phase2Design design, int m1, int i2, int m2, Rng& rng) {
  switch (design) {
    case Phase2Design::Optimal: return phase2DesignCase1(m1, i2, m2);
    case Phase2Design::Heuristic: return phase2HeuristicDesign(m1, i2, m2);
    case Phase2Design::Random: return phase2RandomDesign(m1, i2, m2, rng);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown Phase II design");
}

Phase2ConditionReport verifyPhase2Conditions(const CMatrix& theta1, const CVector& psi,
                                             double tol) {
  if (theta1.cols() != psi.size())
    throw Error(ErrorKind::DimensionMismatch, "Theta1 and psi lengths differ");
  const double i2 = static_cast<double>(theta1.cols());
  // `psi` holds the row psi^H; the column vector psi is its conjugate.
  const CVector psiCol = psi.conjugate();
  Phase2ConditionReport rep;
  rep.tol = tol;
  rep.orthogonality = orthogonalityDeviation(theta1, i2);
  rep.zeroRowSum = theta1.rowwise().sum().cwiseAbs().maxCoeff();
  rep.psiOrthogonal = (theta1 * psiCol).cwiseAbs().maxCoeff();
  rep.shiftedCross = (theta1 * psi.asDiagonal() * theta1.adjoint()).cwiseAbs().maxCoeff();
  return rep;
}

int minPhase2Case2Pilots(int m1, int m2, int n) {
  if (m1 < 1 || m2 < 1 || n < 1) throw Error(ErrorKind::InvalidArgument, "sizes must be >= 1");
  // Q-bar spans min(N, M2) dimensions; inside that subspace the E block and
  // the projection of R must both be resolved, which for N >= M2 means 2 M1 + 1.
  const int span = std::min(n, m2);
  return ((m1 + 1) * m2 + span - 1) / span + m1;
}

Phase2Schedule phase2DesignCase2(int m1, int m2, int n, int i2, ScheduleMode mode, Rng& rng) {
  const int minimum = minPhase2Case2Pilots(m1, m2, n);
  if (i2 < minimum)
    throw Error(ErrorKind::InsufficientPilots, "Phase II (Case 2) needs I2 >= " +
                                                   std::to_string(minimum) + ", got " +
                                                   std::to_string(i2));
  Phase2Schedule s;
  s.caseTag = DesignCase::Case2;
  s.i2 = i2;
  s.m2 = m2;
  if (mode == ScheduleMode::Random) {
    s.theta1 = rng.unitPhasors(m1, i2);
    s.theta2 = rng.unitPhasors(m2, i2);
  } else {
    // IRS 1 cycles through DFT rows 1..M1, IRS 2 through shifts of a
    // Zadoff-Chu sequence carried on DFT row M1 + 1. Without the carrier the
    // shifts sum to a constant and the R block aliases into the E block when N = 1.
    const CMatrix w = dft(i2);
    s.theta1 = w.middleRows(1, m1);
    const CVector zc = zadoffChu(m2);
    s.theta2.resize(m2, i2);
    for (int i = 0; i < i2; ++i) s.theta2.col(i) = cyclicShift(zc, i % m2) * w(m1 + 1, i);
  }
  return s;
}

RankCertificate verifyXiRank(const CMatrix& qBar, const Phase2Schedule& schedule) {
  const CMatrix xi = buildXi(qBar, schedule);
  CMatrix scaled = xi;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double c = scaled.col(j).norm();
    if (c > 0.0) scaled.col(j) /= c;
  }
  const RVector s = linalg::singularValues(scaled);
  RankCertificate cert;
  cert.required = xi.cols();
  cert.rank = linalg::numericalRank(scaled);
  if (s.size() > 0 && s(0) > 0.0 && xi.rows() >= xi.cols()) cert.inverseCondition = s(s.size() - 1) / s(0);
  cert.attempts = 1;
  return cert;
}

Phase2Schedule phase2DesignCase2(int m1, int m2, int n, int i2, ScheduleMode mode,
                                 const CMatrix& qBar, int maxRetries, Rng& rng,
                                 RankCertificate* certificate) {
  if (qBar.rows() != n || qBar.cols() != m2)
    throw Error(ErrorKind::DimensionMismatch, "Q-bar must be N x M2");
  const int attempts = mode == ScheduleMode::Random ? std::max(1, maxRetries) : 1;
  RankCertificate last;
  for (int a = 1; a <= attempts; ++a) {
    Phase2Schedule s = phase2DesignCase2(m1, m2, n, i2, mode, rng);
    last = verifyXiRank(qBar, s);
    last.attempts = a;
    if (last.passed()) {
      if (certificate) *certificate = last;
      return s;
    }
  }
  if (certificate) *certificate = last;
  throw Error(ErrorKind::DesignFailure,
              "no full-rank Phase II schedule after " + std::to_string(attempts) +
                  " attempts (last numerical rank " + std::to_string(last.rank) + " of " +
                  std::to_string(last.required) + ")");
}

DesignCase resolvePhase2Case(CaseSelect select, int n, int m2) {
  switch (select) {
    case CaseSelect::Auto: return n >= m2 ? DesignCase::Case1 : DesignCase::Case2;
    case CaseSelect::Case1:
      if (n < m2)
        throw Error(ErrorKind::CaseMismatch, "Phase II Case 1 needs N >= M2; use Case 2");
      return DesignCase::Case1;
    case CaseSelect::Case2: return DesignCase::Case2;
  }
  return DesignCase::Case1;
}

DesignCase resolvePhase3Case(CaseSelect select, int n, int m1, int m2) {
  switch (select) {
    case CaseSelect::Auto: return n >= m1 + m2 ? DesignCase::Case1 : DesignCase::Case2;
    case CaseSelect::Case1:
      if (n < m1 + m2)
        throw Error(ErrorKind::CaseMismatch, "Phase III Case 1 needs N >= M1 + M2; use Case 2");
      return DesignCase::Case1;
    case CaseSelect::Case2: return DesignCase::Case2;
  }
  return DesignCase::Case1;
}

int minPhase3Pilots(DesignCase c, int k, int m1, int m2, int n) {
  if (k <= 1) return 0;
  if (c == DesignCase::Case1) return k - 1;
  const int unknowns = (k - 1) * (m1 + m2);
  return std::max(k - 1, (unknowns + n - 1) / n);
}

Phase3Schedule phase3Design(int k, int i3, int m1, int m2, int n, ScheduleMode mode, Rng& rng,
                            CaseSelect select) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "Phase III needs K >= 2");
  const DesignCase c = resolvePhase3Case(select, n, m1, m2);
  const int minimum = minPhase3Pilots(c, k, m1, m2, n);
  if (i3 < minimum)
    throw Error(ErrorKind::InsufficientPilots, "Phase III needs I3 >= " + std::to_string(minimum) +
                                                   ", got " + std::to_string(i3));
  Phase3Schedule s;
  s.caseTag = c;
  s.i3 = i3;
  s.x = dft(i3).topRows(k - 1);
  s.theta1.resize(m1, i3);
  s.theta2.resize(m2, i3);
  if (c == DesignCase::Case1) {
    const CVector t1 = mode == ScheduleMode::Random ? CVector(rng.unitPhasors(m1, 1))
                                                    : CVector(CVector::Ones(m1));
    const CVector t2 = mode == ScheduleMode::Random ? CVector(rng.unitPhasors(m2, 1))
                                                    : CVector(CVector::Ones(m2));
    s.theta1.colwise() = t1;
    s.theta2.colwise() = t2;
  } else if (mode == ScheduleMode::Random) {
    s.theta1 = rng.unitPhasors(m1, i3);
    s.theta2 = rng.unitPhasors(m2, i3);
  } else {
    const CVector z1 = zadoffChu(m1), z2 = zadoffChu(m2);
    for (int i = 0; i < i3; ++i) {
      s.theta1.col(i) = cyclicShift(z1, i % m1);
      s.theta2.col(i) = cyclicShift(z2, i % m2);
    }
  }
  return s;
}

PhaseOverhead proposedOverhead(int n, int m1, int m2, int k) {
  if (n < 1 || m1 < 1 || m2 < 1 || k < 1)
    throw Error(ErrorKind::InvalidArgument, "overhead arguments must be positive");
  PhaseOverhead o;
  o.phase1 = m2 + 1;
  o.phase2 = n >= m2 ? 2 * m1 + 1 : minPhase2Case2Pilots(m1, m2, n);
  o.phase3 = minPhase3Pilots(n >= m1 + m2 ? DesignCase::Case1 : DesignCase::Case2, k, m1, m2, n);
  return o;
}

int overhead(Scheme scheme, int n, int m1, int m2, int k) {
  switch (scheme) {
    case Scheme::Proposed: return proposedOverhead(n, m1, m2, k).total();
    case Scheme::Decoupled: return decoupledOverhead(n, m1, m2, k);
    case Scheme::PerAntenna: return perAntennaOverhead(m1, m2, k);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown scheme");
}

}  // namespace irsce
