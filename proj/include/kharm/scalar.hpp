#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>

namespace kharm {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Column-per-sample storage for points and section fields.
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
inline S pi() {
  return boost::math::constants::pi<S>();
}

template <class S>
inline S two_pi() {
  return boost::math::constants::two_pi<S>();
}

template <class S>
inline double to_double(const S& x) {
  return static_cast<double>(x);
}

}  // namespace kharm
