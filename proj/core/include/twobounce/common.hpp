// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace twobounce {

using Vec3 = Eigen::Vector3d;

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry or arguments (degenerate rays, bad walls, index out of range).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Raised while parsing or validating an experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Emits a warning-level diagnostic. The default sink writes to stderr.
void warn(const std::string& message);

/// Replaces the warning sink and returns the previous one; nullptr restores stderr.
using WarningSink = void (*)(const std::string&);
WarningSink set_warning_sink(WarningSink sink);

}  // namespace twobounce
