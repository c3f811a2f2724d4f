#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rnc {

// Physical description of a beam with n_core compliant layers sandwiched
// between n_core+1 stiff layers (2*n_core+1 layers in total). Odd layers
// (stiff) carry longitudinal waves, even layers (compliant) carry shear.
struct LayerStack {
  int n_core = 1;
  double length = 1.0;
  std::vector<double> thicknesses;    // 2*n_core+1, bottom to top
  std::vector<double> densities_odd;  // n_core+1
  std::vector<double> youngs_odd;     // n_core+1
  std::vector<double> shear_even;     // n_core
  std::vector<double> damping_even;   // n_core
  double mass_coeff = 1.0;            // coefficient of the transverse acceleration
  double rotary_coeff = 1.0;          // alpha
  double bending_stiffness = 1.0;     // K

  int n_odd() const { return n_core + 1; }
  double h_odd(int i) const { return thicknesses.at(2 * i); }
  double h_even(int j) const { return thicknesses.at(2 * j + 1); }
  bool damped() const;
};

// Every parameter equal to one: unit wave speeds, tau = 2L.
LayerStack unit_stack(int n_core, double length = 1.0);

struct Diagnostic {
  std::string field;
  std::string message;
};

std::vector<Diagnostic> validate(const LayerStack& stack);

// Throws ValidationError carrying all diagnostics.
void require_valid(const LayerStack& stack);

struct CouplingMatrices {
  Eigen::MatrixXd A;  // n_core x (n_core+1)
  Eigen::MatrixXd B;  // n_core x (n_core+1)
  Eigen::VectorXd N;  // n_core
};

CouplingMatrices build_coupling(const LayerStack& stack);

enum class TauInterpretation { physical, literal };

// Minimal control time. `physical` uses the slowest characteristic speed.
// `literal` evaluates 2L / min(sqrt(K/alpha), sqrt(rho_i/E_i)), with the layer ratio inverted.
double min_control_time(const LayerStack& stack,
                        TauInterpretation interpretation = TauInterpretation::physical);

std::string to_string(TauInterpretation interpretation);

}  // namespace rnc
