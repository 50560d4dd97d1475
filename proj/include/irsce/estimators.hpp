#pragma once

// Least-squares estimators for the three training phases, CSI recovery from
// the scaling identities, closed-form MSE expressions and the normalized MSE
// metric.

#include "irsce/channel_model.hpp"
#include "irsce/common.hpp"
#include "irsce/training_design.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace irsce {

/// How a least-squares step treats a rank-deficient training matrix.
enum class RankPolicy {
  Strict,   ///< throw EstimationPrecondition
  MinNorm,  ///< minimum-norm (pseudo-inverse) solution
};

struct Phase1Estimate {
  CVector g1Hat;    ///< N
  CMatrix qBarHat;  ///< N x M2
};

struct Phase2Estimate {
  CMatrix fHat;  ///< Case 1 only: N x (2 M1 + 1) composite CSI [Q-bar E, R]
  CMatrix eHat;  ///< M2 x (M1 + 1)
  CMatrix rHat;  ///< N x M1
};

struct SingleUserRecovery {
  CMatrix rTildeHat;          ///< N x M2
  std::vector<CMatrix> qHat;  ///< M1 matrices, N x M2
};

/// [g1, Q-bar] = Z1 * pinv(ThetaBar2).
Phase1Estimate lsPhase1(const CMatrix& z1, const CMatrix& thetaBar2);

/// F = Z2 * pinv(Omega).
CMatrix estimateCompositeF(const CMatrix& z2, const CMatrix& omega,
                           RankPolicy policy = RankPolicy::Strict);

/// F = Z2 pinv(Omega); E solves min ||F[:, 0..M1] - Q-bar E||; R = F[:, M1+1..2 M1].
/// Throws CaseMismatch when Q-bar lacks full column rank.
Phase2Estimate lsPhase2Case1(const CMatrix& z2, const CMatrix& omega, const CMatrix& qBarHat,
                             RankPolicy policy = RankPolicy::Strict);

/// Stacked Phase II observation matrix, (I2 N) x (M2 + M1 M2 + N M1), with
/// per-symbol blocks [[1; theta1]^T kron Q-bar diag(theta2), theta1^T kron I_N].
CMatrix buildXi(const CMatrix& qBarHat, const CMatrix& theta1, const CMatrix& theta2);
CMatrix buildXi(const CMatrix& qBarHat, const Phase2Schedule& schedule);

/// [vec(E); vec(R)] = pinv(Xi) z2.
Phase2Estimate lsPhase2Case2(const CVector& z2, const CMatrix& xi, int n, int m1, int m2);

/// R~ = Q-bar diag(e_0), Q_m = Q-bar diag(e_m).
SingleUserRecovery recoverSingleUser(const CMatrix& qBarHat, const CMatrix& eHat);

/// B = [([Q_1 theta2, ..., Q_M1 theta2] + R) diag(theta1), R~ diag(theta2)], N x (M1 + M2).
CMatrix buildB(const std::vector<CMatrix>& qHat, const CMatrix& rHat, const CMatrix& rTildeHat,
               const CVector& theta1, const CVector& theta2);

/// Lambda = pinv(B) Z3 pinv(X), columns [b_k; b~_k] for users 2..K.
CMatrix lsPhase3Case1(const CMatrix& z3, const CMatrix& b, const CMatrix& x);

/// Stacked Phase III observation matrix with per-symbol blocks x^(i)^T kron B^(i).
CMatrix buildPhase3Xi(const UserCsi& reference, const Phase3Schedule& schedule);

/// vec(Lambda) = pinv(Xi3) z3 for a stacked observation matrix.
CMatrix lsPhase3Stacked(const CVector& z3, const CMatrix& xi3, int m1PlusM2, int usersMinusOne);

/// vec(Lambda) = pinv(X^T kron B) z3 (fixed reflections).
CMatrix lsPhase3Case2(const CVector& z3, const CMatrix& x, const CMatrix& b);

/// Per-user CSI for users 2..K: R_k = R_1 diag(b_k), R~_k = R~_1 diag(b~_k),
/// Q_{k,m} = Q_{1,m} b_{k,m}.
std::vector<UserCsi> recoverMultiUser(const UserCsi& reference, const CMatrix& lambdaHat);

// Closed-form MSE of each LS stage (per estimated coefficient).
double theoreticalMsePhase1(const CMatrix& thetaBar2, double sigma2);
double theoreticalMsePhase2Case1(const CMatrix& omega, double sigma2);
double theoreticalMsePhase2Case2(const CMatrix& xi, double sigma2);
/// Factorized form for fixed reflections: sigma2 tr{(X X^H)^-1} tr{(B^H B)^-1} / ((K-1)(M1+M2)).
double theoreticalMsePhase3(const CMatrix& x, const CMatrix& b, double sigma2);
/// Unfactorized form sigma2 tr{(Xi3^H Xi3)^-1} / ((K-1)(M1+M2)).
double theoreticalMsePhase3Stacked(const CMatrix& xi3, double sigma2);

/// (1 / #entries) * ||est - truth||_F^2 / ||truth||_F^2 for one trial.
double normalizedMse(const CMatrix& estimate, const CMatrix& truth);
/// Same metric over a set of matrices treated as one stacked channel.
double normalizedMse(const std::vector<CMatrix>& estimate, const std::vector<CMatrix>& truth);

/// Estimated CSI plus bookkeeping, produced by both the proposed and the
/// decoupled scheme.
struct EstimateReport {
  std::string scheme;
  std::optional<DesignCase> phase2Case;
  std::optional<DesignCase> phase3Case;

  CVector g1Hat;
  CMatrix qBarHat;
  CMatrix fHat;
  CMatrix eHat;
  CMatrix rHat;
  CMatrix rTildeHat;
  std::vector<CMatrix> qHat;
  CMatrix lambdaHat;  ///< (M1 + M2) x (K - 1); empty for K = 1

  /// Recovered CSI of all users; users[0] is the reference user.
  std::vector<UserCsi> users;

  std::vector<std::pair<std::string, int>> pilotsUsed;
  std::vector<std::pair<std::string, double>> theoreticalMse;

  int totalPilots() const;
};

}  // namespace irsce
