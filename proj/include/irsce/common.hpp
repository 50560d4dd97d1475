#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace irsce {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  InsufficientPilots,
  DegenerateChannel,
  EstimationPrecondition,
  CaseMismatch,
  DesignFailure,
  UndefinedMse,
  Unsupported,
  Config,
  Io,
};

const char* toString(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(toString(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Splitmix64 finalizer. Used to derive independent, stable per-trial seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t deriveSeed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Random source with a fully specified output sequence (mt19937_64 plus
/// hand-written transforms), so results are bit-identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform phase in [0, 2pi).
  double phase() { return 2.0 * kPi * uniform(); }

  cd unitPhasor() {
    const double p = phase();
    return {std::cos(p), std::sin(p)};
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cd complexGaussian(double variance) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
  }

  CMatrix complexGaussian(Eigen::Index rows, Eigen::Index cols, double variance) {
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complexGaussian(variance);
    return m;
  }

  CMatrix unitPhasors(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = unitPhasor();
    return m;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace irsce
