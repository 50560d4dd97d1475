#include "irsce/serialization.hpp"

#include <string>

namespace irsce {

using nlohmann::json;

json toJson(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrixFromJson(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Io, "matrix must be an array of rows");
  if (j.empty()) return CMatrix(0, 0);
  const std::size_t cols = j[0].size();
  CMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw Error(ErrorKind::Io, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const json& e = j[r][c];
      if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::Io, "complex entry must be [re, im]");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {e[0].get<double>(), e[1].get<double>()};
    }
  }
  return m;
}

namespace {

json vecJson(const CVector& v) { return toJson(CMatrix(v.transpose())).at(0); }

CVector vecFromJson(const json& j) {
  json wrapped = json::array({j});
  return matrixFromJson(wrapped).row(0).transpose();
}

DesignCase caseFromString(const std::string& s) {
  if (s == "case1") return DesignCase::Case1;
  if (s == "case2") return DesignCase::Case2;
  throw Error(ErrorKind::Io, "unknown case tag '" + s + "'");
}

}  // namespace

json toJson(const Phase1Schedule& s) {
  return {{"phase", 1}, {"i1", s.i1}, {"thetaBar2", toJson(s.thetaBar2)},
          {"theta1Fixed", vecJson(s.theta1Fixed)}};
}

json toJson(const Phase2Schedule& s) {
  json j = {{"phase", 2}, {"case", toString(s.caseTag)}, {"i2", s.i2}, {"m2", s.m2},
            {"theta1", toJson(s.theta1)}, {"theta2", toJson(s.theta2)}};
  if (s.caseTag == DesignCase::Case1) {
    j["psi"] = vecJson(s.psi);
    j["omega"] = toJson(s.omega);
  }
  return j;
}

json toJson(const Phase3Schedule& s) {
  return {{"phase", 3}, {"case", toString(s.caseTag)}, {"i3", s.i3},
          {"theta1", toJson(s.theta1)}, {"theta2", toJson(s.theta2)}, {"x", toJson(s.x)}};
}

json toJson(const EstimateReport& r) {
  json j;
  j["scheme"] = r.scheme;
  if (r.phase2Case) j["phase2Case"] = toString(*r.phase2Case);
  if (r.phase3Case) j["phase3Case"] = toString(*r.phase3Case);
  if (r.g1Hat.size() > 0) j["g1Hat"] = vecJson(r.g1Hat);
  if (r.qBarHat.size() > 0) j["qBarHat"] = toJson(r.qBarHat);
  if (r.eHat.size() > 0) j["eHat"] = toJson(r.eHat);
  if (r.fHat.size() > 0) j["fHat"] = toJson(r.fHat);
  j["rHat"] = toJson(r.rHat);
  j["rTildeHat"] = toJson(r.rTildeHat);
  j["qHat"] = json::array();
  for (const CMatrix& q : r.qHat) j["qHat"].push_back(toJson(q));
  if (r.lambdaHat.size() > 0) j["lambdaHat"] = toJson(r.lambdaHat);
  j["pilotsUsed"] = json::object();
  for (const auto& [name, count] : r.pilotsUsed) j["pilotsUsed"][name] = count;
  j["totalPilots"] = r.totalPilots();
  j["theoreticalMse"] = json::object();
  for (const auto& [name, value] : r.theoreticalMse) j["theoreticalMse"][name] = value;
  return j;
}

Phase1Schedule phase1FromJson(const json& j) {
  Phase1Schedule s;
  s.i1 = j.at("i1").get<int>();
  s.thetaBar2 = matrixFromJson(j.at("thetaBar2"));
  s.theta1Fixed = vecFromJson(j.at("theta1Fixed"));
  return s;
}

Phase2Schedule phase2FromJson(const json& j) {
  Phase2Schedule s;
  s.caseTag = caseFromString(j.at("case").get<std::string>());
  s.i2 = j.at("i2").get<int>();
  s.m2 = j.at("m2").get<int>();
  s.theta1 = matrixFromJson(j.at("theta1"));
  s.theta2 = matrixFromJson(j.at("theta2"));
  if (s.caseTag == DesignCase::Case1) {
    s.psi = vecFromJson(j.at("psi"));
    s.omega = matrixFromJson(j.at("omega"));
  }
  return s;
}

Phase3Schedule phase3FromJson(const json& j) {
  Phase3Schedule s;
  s.caseTag = caseFromString(j.at("case").get<std::string>());
  s.i3 = j.at("i3").get<int>();
  s.theta1 = matrixFromJson(j.at("theta1"));
  s.theta2 = matrixFromJson(j.at("theta2"));
  s.x = matrixFromJson(j.at("x"));
  return s;
}

}  // namespace irsce
