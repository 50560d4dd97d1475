#include "irsce/linalg.hpp"

#include <Eigen/SVD>

#include <string>

namespace irsce {

const char* toString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::InsufficientPilots: return "insufficient pilots";
    case ErrorKind::DegenerateChannel: return "degenerate channel";
    case ErrorKind::EstimationPrecondition: return "estimation precondition";
    case ErrorKind::CaseMismatch: return "case mismatch";
    case ErrorKind::DesignFailure: return "design failure";
    case ErrorKind::UndefinedMse: return "undefined MSE";
    case ErrorKind::Unsupported: return "unsupported configuration";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

namespace linalg {
namespace {

using Svd = Eigen::BDCSVD<CMatrix>;

Eigen::Index rankFromSingularValues(const RVector& s, double relTol) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = relTol * s(0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return r;
}

// Pseudo-inverse applied to B using the thin SVD, keeping the first `rank` modes.
CMatrix applyPinv(const Svd& svd, const CMatrix& b, Eigen::Index rank) {
  const RVector& s = svd.singularValues();
  CMatrix uhb = svd.matrixU().leftCols(rank).adjoint() * b;
  for (Eigen::Index i = 0; i < rank; ++i) uhb.row(i) /= s(i);
  return svd.matrixV().leftCols(rank) * uhb;
}

}  // namespace

RVector singularValues(const CMatrix& a) {
  if (a.size() == 0) return RVector();
  return Svd(a).singularValues();
}

Eigen::Index numericalRank(const CMatrix& a, double relTol) {
  return rankFromSingularValues(singularValues(a), relTol);
}

double inverseConditionNumber(const CMatrix& a) {
  const RVector s = singularValues(a);
  if (s.size() == 0 || s(0) <= 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

CMatrix lsSolve(const CMatrix& a, const CMatrix& b, std::string_view what) {
  if (a.rows() != b.rows())
    throw Error(ErrorKind::DimensionMismatch,
                "least-squares operands have " + std::to_string(a.rows()) + " and " +
                    std::to_string(b.rows()) + " rows");
  if (a.rows() < a.cols())
    throw Error(ErrorKind::EstimationPrecondition,
                std::string(what) + " has fewer rows (" + std::to_string(a.rows()) +
                    ") than unknowns (" + std::to_string(a.cols()) + ")");

  // Equilibrate columns so that the relative rank threshold is insensitive to
  // the very different path-loss scales of the unknown blocks.
  RVector scale(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double n = a.col(j).norm();
    if (n == 0.0)
      throw Error(ErrorKind::EstimationPrecondition,
                  std::string(what) + " has an all-zero column " + std::to_string(j));
    scale(j) = 1.0 / n;
  }
  const CMatrix as = a * scale.asDiagonal();
  Svd svd(as, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index rank = rankFromSingularValues(svd.singularValues(), kRankTolerance);
  if (rank < a.cols())
    throw Error(ErrorKind::EstimationPrecondition,
                std::string(what) + " is rank-deficient (numerical rank " + std::to_string(rank) +
                    " < " + std::to_string(a.cols()) + ")");
  return scale.asDiagonal() * applyPinv(svd, b, rank);
}

CMatrix lsSolveMinNorm(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows())
    throw Error(ErrorKind::DimensionMismatch, "least-squares operands disagree in row count");
  Svd svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index rank = rankFromSingularValues(svd.singularValues(), kRankTolerance);
  return applyPinv(svd, b, rank);
}

CMatrix lsSolveRight(const CMatrix& z, const CMatrix& t, std::string_view what) {
  if (z.cols() != t.cols())
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " has " + std::to_string(t.cols()) + " columns but data has " +
                    std::to_string(z.cols()));
  return lsSolve(t.adjoint(), z.adjoint(), what).adjoint();
}

CMatrix lsSolveRightMinNorm(const CMatrix& z, const CMatrix& t) {
  if (z.cols() != t.cols())
    throw Error(ErrorKind::DimensionMismatch, "data and training matrix disagree in length");
  return lsSolveMinNorm(t.adjoint(), z.adjoint()).adjoint();
}

double traceInverseGram(const CMatrix& a) {
  const RVector s = singularValues(a);
  const Eigen::Index full = std::min(a.rows(), a.cols());
  if (full == 0 || rankFromSingularValues(s, kRankTolerance) < full)
    throw Error(ErrorKind::UndefinedMse, "Gram matrix is singular");
  return (1.0 / s.array().square()).sum();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw Error(ErrorKind::DimensionMismatch, "cannot reshape vector of length " +
                                                  std::to_string(v.size()) + " to " +
                                                  std::to_string(rows) + "x" + std::to_string(cols));
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

double relativeError(const CMatrix& estimate, const CMatrix& truth) {
  const double diff = (estimate - truth).norm();
  const double ref = truth.norm();
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace linalg
}  // namespace irsce
