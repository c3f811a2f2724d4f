#pragma once

#include <cmath>

#include "rnc/beam_model.hpp"
#include "rnc/fem_assembly.hpp"

namespace rnc::testing {

inline LayerStack decoupled_stack(int n_core = 1) {
  LayerStack s = unit_stack(n_core);
  s.shear_even.assign(n_core, 0.0);
  return s;
}

inline LayerStack damped_stack(int n_core, double damping) {
  LayerStack s = unit_stack(n_core);
  s.damping_even.assign(n_core, damping);
  return s;
}

// Five layers with distinct parameters.
inline LayerStack graded_stack() {
  LayerStack s;
  s.n_core = 2;
  s.length = 1.0;
  s.thicknesses = {0.8, 0.3, 1.0, 0.4, 1.2};
  s.densities_odd = {1.0, 1.3, 0.9};
  s.youngs_odd = {1.5, 1.8, 1.2};
  s.shear_even = {0.7, 1.1};
  s.damping_even = {0.0, 0.0};
  s.mass_coeff = 1.2;
  s.rotary_coeff = 0.8;
  s.bending_stiffness = 1.1;
  return s;
}

// Hermite interpolant of (f, f') plus Lagrange interpolants for each layer.
inline Eigen::VectorXd interpolate(const DiscreteSystem& s, double (*w)(double), double (*dw)(double),
                                   double (*y)(double, int)) {
  const auto& L = s.layout;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(L.n_full());
  for (int i = 0; i <= L.n_elements; ++i) {
    const double x = s.mesh.nodes[i];
    if (w) {
      full(L.w_value(i)) = w(x);
      full(L.w_slope(i)) = dw(x);
    }
  }
  if (y)
    for (int layer = 0; layer < L.n_layers; ++layer)
      for (int e = 0; e < L.n_elements; ++e)
        for (int a = 0; a <= L.y_order; ++a) {
          const double x = s.mesh.nodes[e] + s.mesh.element_length(e) * a / L.y_order;
          full(L.y_begin(layer) + L.y_order * e + a) = y(x, layer);
        }
  return full;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace rnc::testing
