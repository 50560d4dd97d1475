#pragma once

// Training reflection schedules and pilot matrices for the three estimation
// phases, their optimality/rank certificates, and pilot-overhead accounting.
//
// Reflection sequences are stored column-per-symbol: column i of `theta1`
// is the IRS 1 reflection vector used during training symbol i.

#include "irsce/channel_model.hpp"
#include "irsce/common.hpp"

#include <string>

namespace irsce {

enum class DesignCase { Case1, Case2 };
enum class CaseSelect { Auto, Case1, Case2 };

enum class Phase1Design { Optimal, Random };
/// Joint IRS 1 / common IRS 2 designs for Phase II, Case 1.
enum class Phase2Design { Optimal, Heuristic, Random };
/// Construction family for rank-certified schedules (Phase II Case 2, Phase III).
enum class ScheduleMode { Random, Structured };

enum class Scheme { Proposed, Decoupled, PerAntenna };

const char* toString(DesignCase c);
const char* toString(Phase1Design d);
const char* toString(Phase2Design d);
const char* toString(ScheduleMode m);
const char* toString(Scheme s);
Phase1Design parsePhase1Design(const std::string& s);
Phase2Design parsePhase2Design(const std::string& s);
ScheduleMode parseScheduleMode(const std::string& s);
Scheme parseScheme(const std::string& s);
CaseSelect parseCaseSelect(const std::string& s);

struct Phase1Schedule {
  int i1 = 0;
  CMatrix thetaBar2;    ///< (M2 + 1) x I1, first row all ones
  CVector theta1Fixed;  ///< M1, all ones

  int m2() const { return static_cast<int>(thetaBar2.rows()) - 1; }
  ReflectionState reflection(int i) const;
};

struct Phase2Schedule {
  DesignCase caseTag = DesignCase::Case1;
  int i2 = 0;
  int m2 = 0;
  CMatrix theta1;  ///< M1 x I2
  CMatrix theta2;  ///< M2 x I2 (Case 1: column i = psi(i) * ones)
  CVector psi;     ///< Case 1: common IRS 2 phase per symbol (the row psi^H)
  CMatrix omega;   ///< Case 1: (2 M1 + 1) x I2 joint training matrix

  ReflectionState reflection(int i) const;
};

struct Phase3Schedule {
  DesignCase caseTag = DesignCase::Case1;
  int i3 = 0;
  CMatrix theta1;  ///< M1 x I3 (identical columns in Case 1)
  CMatrix theta2;  ///< M2 x I3 (identical columns in Case 1)
  CMatrix x;       ///< (K - 1) x I3 pilot symbols of users 2..K

  bool fixedReflections() const;
  ReflectionState reflection(int i) const;
};

struct RankCertificate {
  Eigen::Index rank = 0;
  Eigen::Index required = 0;
  double inverseCondition = 0.0;
  int attempts = 0;
  bool passed() const { return rank == required; }
};

struct Phase2ConditionReport {
  double orthogonality = 0.0;   ///< max |Theta1 Theta1^H - I2 I|
  double zeroRowSum = 0.0;      ///< max |Theta1 1|
  double psiOrthogonal = 0.0;   ///< max |Theta1 psi|
  double shiftedCross = 0.0;    ///< max |Theta1 diag(psi^H) Theta1^H|
  double tol = 0.0;
  bool pass() const;
};

/// n x n DFT matrix, entry (p, q) = exp(-j 2 pi p q / n).
CMatrix dft(int n);

/// Length-`len` Zadoff-Chu sequence with the given root.
CVector zadoffChu(int len, int root = 1);

/// max |A A^H - scale I|.
double orthogonalityDeviation(const CMatrix& a, double scale);

Phase1Schedule phase1Design(int m2, int i1);
Phase1Schedule phase1RandomDesign(int m2, int i1, Rng& rng);

/// Rows [psi^H; Theta1 diag(psi^H); Theta1].
CMatrix assembleOmega(const CMatrix& theta1, const CVector& psi);

/// Shifted-DFT joint design: Theta1 = rows 1..M1 and psi^H = row M1+1 of the
/// DFT with its first row moved to the end.
Phase2Schedule phase2DesignCase1(int m1, int i2, int m2 = 1);
/// Unshifted variant (Theta1 = first M1 DFT rows, psi^H = row M1+1). Its Omega
/// repeats psi^H and is therefore rank-deficient.
Phase2Schedule phase2HeuristicDesign(int m1, int i2, int m2 = 1);
Phase2Schedule phase2RandomDesign(int m1, int i2, int m2, Rng& rng);
Phase2Schedule phase2Case1Design(Phase2Design design, int m1, int i2, int m2, Rng& rng);

Phase2ConditionReport verifyPhase2Conditions(const CMatrix& theta1, const CVector& psi,
                                             double tol = 1e-10);

/// ceil((M1 + 1) M2 / min(N, M2)) + M1.
int minPhase2Case2Pilots(int m1, int m2, int n);

/// Uncertified Case 2 schedule.
Phase2Schedule phase2DesignCase2(int m1, int m2, int n, int i2, ScheduleMode mode, Rng& rng);

/// Rank of the stacked Phase II observation matrix for this schedule and Q-bar.
RankCertificate verifyXiRank(const CMatrix& qBar, const Phase2Schedule& schedule);

/// Case 2 schedule certified against `qBar`. Random mode redraws up to
/// `maxRetries` times; throws DesignFailure with the last measured rank.
Phase2Schedule phase2DesignCase2(int m1, int m2, int n, int i2, ScheduleMode mode,
                                 const CMatrix& qBar, int maxRetries, Rng& rng,
                                 RankCertificate* certificate = nullptr);

DesignCase resolvePhase2Case(CaseSelect select, int n, int m2);
DesignCase resolvePhase3Case(CaseSelect select, int n, int m1, int m2);

int minPhase3Pilots(DesignCase c, int k, int m1, int m2, int n);

/// Pilot matrix X = first K-1 rows of dft(I3); reflections fixed (Case 1) or
/// varying per symbol (Case 2).
Phase3Schedule phase3Design(int k, int i3, int m1, int m2, int n, ScheduleMode mode, Rng& rng,
                            CaseSelect select = CaseSelect::Auto);

struct PhaseOverhead {
  int phase1 = 0;
  int phase2 = 0;
  int phase3 = 0;
  int total() const { return phase1 + phase2 + phase3; }
};

/// Per-phase minimum pilot counts of the always-ON scheme for general M1, M2.
PhaseOverhead proposedOverhead(int n, int m1, int m2, int k);

/// Minimum total pilot symbols of `scheme` (decoupled and per-antenna counts
/// come from the benchmarks module).
int overhead(Scheme scheme, int n, int m1, int m2, int k);

}  // namespace irsce
