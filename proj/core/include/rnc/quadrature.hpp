#pragma once

#include <vector>

namespace rnc {

struct GaussRule {
  std::vector<double> points;   // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

// n-point Gauss-Legendre rule mapped to the unit interval, exact for degree 2n-1.
GaussRule gauss_legendre(int n);

}  // namespace rnc
