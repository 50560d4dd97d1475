#pragma once

#include "irsce/common.hpp"

#include <string_view>

namespace irsce::linalg {

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-10;

/// Singular values in decreasing order.
RVector singularValues(const CMatrix& a);

/// Number of singular values above `relTol * s_max`.
Eigen::Index numericalRank(const CMatrix& a, double relTol = kRankTolerance);

/// s_min / s_max over the min(rows, cols) singular values; 0 for an empty or zero matrix.
double inverseConditionNumber(const CMatrix& a);

/// Least-squares solution of min ||A X - B||_F. A must have full column rank
/// (checked after column equilibration); throws EstimationPrecondition naming
/// `what` otherwise.
CMatrix lsSolve(const CMatrix& a, const CMatrix& b, std::string_view what = "matrix");

/// Minimum-norm least-squares solution (pseudo-inverse), no rank requirement.
CMatrix lsSolveMinNorm(const CMatrix& a, const CMatrix& b);

/// Z * pinv(T) for a full-row-rank T, i.e. min ||X T - Z||_F.
CMatrix lsSolveRight(const CMatrix& z, const CMatrix& t, std::string_view what = "matrix");

/// Z * pinv(T) for any T (minimum-norm).
CMatrix lsSolveRightMinNorm(const CMatrix& z, const CMatrix& t);

/// Sum of 1/s_i^2 over all min(rows, cols) singular values, which equals
/// tr{(A^H A)^{-1}} for full column rank and tr{(A A^H)^{-1}} for full row
/// rank. Throws UndefinedMse if A is rank-deficient.
double traceInverseGram(const CMatrix& a);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Column-major vectorization.
CVector vec(const CMatrix& a);
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

/// ||A - B||_F / ||B||_F (or ||A||_F when B is zero).
double relativeError(const CMatrix& estimate, const CMatrix& truth);

}  // namespace irsce::linalg
