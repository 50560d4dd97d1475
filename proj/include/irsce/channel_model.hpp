#pragma once

// Geometric path-loss fading channels for the double-IRS uplink and the
// cascaded quantities derived from them.
//
// Indexing: users are 0-based here; user 0 is the reference user.

#include "irsce/common.hpp"

#include <cstdint>
#include <vector>

namespace irsce {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Position& a, const Position& b);

struct SystemConfig {
  int n = 8;   ///< BS antennas
  int m1 = 8;  ///< IRS 1 subsurfaces (near the users)
  int m2 = 8;  ///< IRS 2 subsurfaces (near the BS)
  int k = 1;   ///< users

  double txPowerDbm = 15.0;
  double noisePowerDbm = -65.0;
  double gamma0Db = -30.0;
  double alphaNear = 2.2;  ///< user cluster <-> IRS 1 and BS <-> IRS 2
  double alphaFar = 3.0;   ///< all other links

  Position bs{1.0, 0.0, 2.0};
  Position irs1{0.0, 49.5, 1.0};
  Position irs2{0.0, 0.5, 1.0};
  Position userCenter{1.0, 50.0, 0.0};
  double userSpreadRadius = 1.0;

  /// Reflecting elements aggregated into one subsurface. Elements of a
  /// subsurface are taken as co-phased (far field), so every traversal of an
  /// IRS scales the amplitude by this count.
  int elementsPerSubsurface = 1;

  std::uint64_t seed = 1;

  /// Normalized noise power sigma_N^2 / P (linear).
  double sigma2() const;

  /// Throws Error(Config) on an invalid configuration.
  void validate() const;
};

/// Raw per-link channels for one fading draw.
struct ChannelRealization {
  CMatrix g1;                 ///< N x M1, IRS 1 -> BS
  CMatrix g2;                 ///< N x M2, IRS 2 -> BS
  CMatrix d;                  ///< M2 x M1, IRS 1 -> IRS 2
  std::vector<CVector> u;     ///< per user, M1, user -> IRS 1
  std::vector<CVector> uTilde;  ///< per user, M2, user -> IRS 2
  std::vector<Position> userPositions;

  int n() const { return static_cast<int>(g1.rows()); }
  int m1() const { return static_cast<int>(g1.cols()); }
  int m2() const { return static_cast<int>(g2.cols()); }
  int k() const { return static_cast<int>(u.size()); }
};

/// Cascaded CSI of a single user.
struct UserCsi {
  CMatrix r;               ///< N x M1
  CMatrix rTilde;          ///< N x M2
  std::vector<CMatrix> q;  ///< M1 matrices, each N x M2
};

struct CascadedChannelSet {
  std::vector<UserCsi> users;
  CVector dBar;  ///< M2, reference user
  CMatrix qBar;  ///< N x M2
  CVector g1;    ///< N
  CMatrix e;     ///< M2 x (M1 + 1), columns e_0 .. e_M1
  std::vector<CVector> b;       ///< per user, M1 (all-ones for user 0)
  std::vector<CVector> bTilde;  ///< per user, M2 (all-ones for user 0)

  int n() const { return static_cast<int>(qBar.rows()); }
  int m1() const { return static_cast<int>(e.cols()) - 1; }
  int m2() const { return static_cast<int>(qBar.cols()); }
  int k() const { return static_cast<int>(users.size()); }
};

/// IRS reflection coefficients. Entries are unit-modulus (ON) or the whole
/// vector is zero (IRS switched OFF).
struct ReflectionState {
  CVector theta1;
  CVector theta2;

  static ReflectionState allOn(int m1, int m2);
  /// Throws InvalidArgument on mixed ON/OFF or non-unit-modulus entries.
  void validate(double tol = 1e-9) const;
};

/// Modulus below which d-bar, u_1 or u~_1 entries are treated as degenerate.
inline constexpr double kDegeneracyThreshold = 1e-12;

/// gamma0 / d^alpha in linear scale.
double pathLoss(double distanceMeters, double alpha, double gamma0Db);

ChannelRealization genChannels(const SystemConfig& config, std::uint64_t trialSeed);

CascadedChannelSet cascade(const ChannelRealization& real,
                           double singularityThreshold = kDegeneracyThreshold);

/// Cascaded-form effective channel: sum_m Q_{k,m} theta2 theta1_m + R~_k theta2 + R_k theta1.
CVector effectiveChannel(const CascadedChannelSet& cc, int k, const ReflectionState& refl);

/// Raw-form effective channel G2 Phi2 D Phi1 u_k + G2 Phi2 u~_k + G1 Phi1 u_k.
CVector effectiveChannelRaw(const ChannelRealization& real, int k, const ReflectionState& refl);

/// Reference-user channel through the scaling matrix:
/// Q-bar diag(theta2) E [1; theta1] + R_1 theta1.
CVector effectiveChannelScaled(const CascadedChannelSet& cc, const ReflectionState& refl);

/// h * pilot + CN(0, sigma2 I).
CVector receive(const CVector& h, cd pilot, double sigma2, Rng& rng);

}  // namespace irsce
