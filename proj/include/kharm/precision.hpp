#pragma once

// Quad precision scalar for checks that stack many finite differences
// (iterated rough Laplacians at N = 1024 lose all digits in double).

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include "kharm/scalar.hpp"

namespace kharm {

using quad = boost::multiprecision::float128;

}  // namespace kharm
