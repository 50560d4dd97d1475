#include "irsce/channel_model.hpp"

#include <cmath>
#include <string>

namespace irsce {

double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double SystemConfig::sigma2() const { return std::pow(10.0, (noisePowerDbm - txPowerDbm) / 10.0); }

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (n < 1) fail("n must be >= 1");
  if (m1 < 1) fail("m1 must be >= 1");
  if (m2 < 1) fail("m2 must be >= 1");
  if (k < 1) fail("k must be >= 1");
  for (double v : {txPowerDbm, noisePowerDbm, gamma0Db, alphaNear, alphaFar, userSpreadRadius})
    if (!std::isfinite(v)) fail("all powers, exponents and radii must be finite");
  for (const Position& p : {bs, irs1, irs2, userCenter})
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      fail("positions must be finite");
  if (userSpreadRadius < 0.0) fail("userSpreadRadius must be >= 0");
  if (elementsPerSubsurface < 1) fail("elementsPerSubsurface must be >= 1");
  const double s2 = sigma2();
  if (!(s2 > 0.0) || !std::isfinite(s2)) fail("normalized noise power must be positive and finite");
}

ReflectionState ReflectionState::allOn(int m1, int m2) {
  return {CVector::Ones(m1), CVector::Ones(m2)};
}

void ReflectionState::validate(double tol) const {
  auto check = [tol](const CVector& t, const char* name) {
    if (t.size() == 0) return;
    const bool off = t.cwiseAbs().maxCoeff() == 0.0;
    if (off) return;
    for (Eigen::Index i = 0; i < t.size(); ++i)
      if (std::abs(std::abs(t(i)) - 1.0) > tol)
        throw Error(ErrorKind::InvalidArgument,
                    std::string(name) + " mixes ON/OFF or has non-unit-modulus entries");
  };
  check(theta1, "theta1");
  check(theta2, "theta2");
}

double pathLoss(double distanceMeters, double alpha, double gamma0Db) {
  if (!(distanceMeters > 0.0))
    throw Error(ErrorKind::InvalidArgument, "path-loss distance must be positive");
  return std::pow(10.0, gamma0Db / 10.0) / std::pow(distanceMeters, alpha);
}

ChannelRealization genChannels(const SystemConfig& config, std::uint64_t trialSeed) {
  config.validate();
  Rng rng(deriveSeed({config.seed, trialSeed, 0x6368616eULL}));

  ChannelRealization real;
  real.userPositions.reserve(config.k);
  for (int k = 0; k < config.k; ++k) {
    const double radius = config.userSpreadRadius * std::sqrt(rng.uniform());
    const double angle = rng.phase();
    real.userPositions.push_back({config.userCenter.x + radius * std::cos(angle),
                                  config.userCenter.y + radius * std::sin(angle),
                                  config.userCenter.z});
  }

  const double agg = static_cast<double>(config.elementsPerSubsurface);
  const double gain = agg * agg;
  const double g0 = config.gamma0Db;
  auto variance = [&](const Position& a, const Position& b, double alpha) {
    return pathLoss(distance(a, b), alpha, g0);
  };

  real.g1 = rng.complexGaussian(config.n, config.m1,
                                gain * variance(config.irs1, config.bs, config.alphaFar));
  real.g2 = rng.complexGaussian(config.n, config.m2,
                                gain * variance(config.irs2, config.bs, config.alphaNear));
  real.d = rng.complexGaussian(config.m2, config.m1,
                               gain * variance(config.irs1, config.irs2, config.alphaFar));
  for (int k = 0; k < config.k; ++k) {
    const Position& p = real.userPositions[k];
    real.u.push_back(rng.complexGaussian(config.m1, 1, variance(p, config.irs1, config.alphaNear)));
    real.uTilde.push_back(
        rng.complexGaussian(config.m2, 1, variance(p, config.irs2, config.alphaFar)));
  }
  return real;
}

namespace {

void requireNonDegenerate(const CVector& v, double threshold, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) < threshold)
      throw Error(ErrorKind::DegenerateChannel,
                  std::string(name) + " entry " + std::to_string(i) + " is below the singularity threshold");
}

}  // namespace

CascadedChannelSet cascade(const ChannelRealization& real, double singularityThreshold) {
  const int n = real.n(), m1 = real.m1(), m2 = real.m2(), kUsers = real.k();
  if (kUsers < 1) throw Error(ErrorKind::DimensionMismatch, "realization has no users");
  if (real.g2.rows() != n || real.d.rows() != m2 || real.d.cols() != m1)
    throw Error(ErrorKind::DimensionMismatch, "inconsistent link dimensions");
  for (int k = 0; k < kUsers; ++k)
    if (real.u[k].size() != m1 || real.uTilde[k].size() != m2)
      throw Error(ErrorKind::DimensionMismatch, "inconsistent user link dimensions");

  CascadedChannelSet cc;
  cc.users.resize(kUsers);
  for (int k = 0; k < kUsers; ++k) {
    UserCsi& csi = cc.users[k];
    csi.r = real.g1 * real.u[k].asDiagonal();
    csi.rTilde = real.g2 * real.uTilde[k].asDiagonal();
    csi.q.reserve(m1);
    for (int m = 0; m < m1; ++m) {
      const CVector dTilde = real.d.col(m) * real.u[k](m);
      csi.q.push_back(real.g2 * dTilde.asDiagonal());
    }
  }

  const CVector& u1 = real.u[0];
  const CVector& uTilde1 = real.uTilde[0];
  CMatrix dTilde1 = real.d * u1.asDiagonal();  // columns d~_{1,m}
  cc.dBar = uTilde1 + dTilde1.rowwise().sum();
  requireNonDegenerate(cc.dBar, singularityThreshold, "d-bar");
  requireNonDegenerate(u1, singularityThreshold, "u_1");
  requireNonDegenerate(uTilde1, singularityThreshold, "u~_1");

  cc.qBar = real.g2 * cc.dBar.asDiagonal();
  cc.g1 = real.g1 * u1;

  cc.e.resize(m2, m1 + 1);
  cc.e.col(0) = uTilde1.cwiseQuotient(cc.dBar);
  for (int m = 0; m < m1; ++m) cc.e.col(m + 1) = dTilde1.col(m).cwiseQuotient(cc.dBar);

  for (int k = 0; k < kUsers; ++k) {
    cc.b.push_back(real.u[k].cwiseQuotient(u1));
    cc.bTilde.push_back(real.uTilde[k].cwiseQuotient(uTilde1));
  }
  // Reference user scalings are exactly one, not merely u/u.
  cc.b[0].setOnes();
  cc.bTilde[0].setOnes();
  return cc;
}

CVector effectiveChannel(const CascadedChannelSet& cc, int k, const ReflectionState& refl) {
  if (k < 0 || k >= cc.k()) throw Error(ErrorKind::InvalidArgument, "user index out of range");
  const UserCsi& csi = cc.users[k];
  if (refl.theta1.size() != csi.r.cols() || refl.theta2.size() != csi.rTilde.cols())
    throw Error(ErrorKind::DimensionMismatch, "reflection vectors do not match IRS sizes");
  CVector h = csi.rTilde * refl.theta2 + csi.r * refl.theta1;
  for (std::size_t m = 0; m < csi.q.size(); ++m) h += csi.q[m] * refl.theta2 * refl.theta1(m);
  return h;
}

CVector effectiveChannelRaw(const ChannelRealization& real, int k, const ReflectionState& refl) {
  if (k < 0 || k >= real.k()) throw Error(ErrorKind::InvalidArgument, "user index out of range");
  if (refl.theta1.size() != real.m1() || refl.theta2.size() != real.m2())
    throw Error(ErrorKind::DimensionMismatch, "reflection vectors do not match IRS sizes");
  const auto phi1 = refl.theta1.asDiagonal();
  const auto phi2 = refl.theta2.asDiagonal();
  const CVector viaIrs1 = phi1 * real.u[k];
  return real.g2 * (phi2 * (real.d * viaIrs1)) + real.g2 * (phi2 * real.uTilde[k]) +
         real.g1 * viaIrs1;
}

CVector effectiveChannelScaled(const CascadedChannelSet& cc, const ReflectionState& refl) {
  if (refl.theta1.size() != cc.m1() || refl.theta2.size() != cc.m2())
    throw Error(ErrorKind::DimensionMismatch, "reflection vectors do not match IRS sizes");
  CVector augmented(cc.m1() + 1);
  augmented(0) = 1.0;
  augmented.tail(cc.m1()) = refl.theta1;
  return cc.qBar * (refl.theta2.asDiagonal() * (cc.e * augmented)) + cc.users[0].r * refl.theta1;
}

CVector receive(const CVector& h, cd pilot, double sigma2, Rng& rng) {
  if (sigma2 < 0.0) throw Error(ErrorKind::InvalidArgument, "noise power must be non-negative");
  CVector z = h * pilot;
  if (sigma2 > 0.0)
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += rng.complexGaussian(sigma2);
  return z;
}

}  // namespace irsce
