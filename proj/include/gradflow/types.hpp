#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

namespace gradflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using ParamMap = std::map<std::string, double>;

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

} // namespace gradflow
