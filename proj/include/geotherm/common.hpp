#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace geotherm {

using Vec2 = Eigen::Vector2d;

[[noreturn]] inline void fail(const std::string& what) { throw std::runtime_error(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace geotherm
