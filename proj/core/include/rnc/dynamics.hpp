#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "rnc/fem_assembly.hpp"

namespace rnc {

// Samples on the integration grid; linear interpolation in between.
struct Inputs {
  Eigen::MatrixXd controls;     // (n_steps+1) x n_inputs, may be empty
  Eigen::VectorXd body_load;    // load vector on the free dofs, may be empty
  Eigen::VectorXd body_signal;  // (n_steps+1) amplitudes of body_load
};

struct IntegrateOptions {
  bool store_states = false;
  bool record_traces = true;
};

struct Trajectory {
  BoundaryKind bc = BoundaryKind::HingedNeumann;
  double dt = 0.0;
  double damping_sign = 1.0;
  std::vector<double> times;
  std::vector<State> states;  // only with store_states
  State initial, final;       // at times.front() and times.back()
  std::vector<double> energy;
  std::vector<double> energy_higher;  // h-N only
  std::vector<double> dissipation;    // running integral of v.Dv from t = 0
  std::vector<std::string> channel_names;
  Eigen::MatrixXd channels;  // one row per time sample
};

// Crank-Nicolson stepping of M x'' + s D x' + K x = g with cached factorizations
// of M + (s k/2) D + (k^2/4) K for both signs of s k.
class Stepper {
 public:
  Stepper(const DiscreteSystem& sys, double dt);

  const DiscreteSystem& system() const { return *sys_; }
  double dt() const { return dt_; }

  // direction = +1 forward, -1 backward in time. fx and load are step averages.
  void step(State& y, int direction, double damping_sign, const Eigen::VectorXd* fx,
            const Eigen::VectorXd* load) const;

 private:
  using Solver = Eigen::SimplicialLDLT<SpMat>;
  const DiscreteSystem* sys_;
  double dt_;
  std::shared_ptr<const Solver> plus_, minus_;
};

int steps_for(double T, double dt);

Trajectory integrate(const Stepper& stepper, const State& y0, int n_steps,
                     const Inputs& inputs = {}, IntegrateOptions options = {});
Trajectory integrate(const DiscreteSystem& sys, const State& y0, double T, double dt,
                     const Inputs& inputs = {}, IntegrateOptions options = {});

// Dual problem M p'' - D p' + K p = 0 from terminal data at T back to 0.
// The returned trajectory is ordered by increasing time.
Trajectory adjoint_integrate(const Stepper& stepper, const State& zT, int n_steps,
                             IntegrateOptions options = {});
Trajectory adjoint_integrate(const DiscreteSystem& sys, const State& zT, double T, double dt,
                             IntegrateOptions options = {});

// Forward (damped, forced) equation from terminal data back to t = 0.
State integrate_backward(const Stepper& stepper, const State& yT, int n_steps,
                         const Inputs& inputs);

// E(T) - E(0) + s * int v.Dv dt, natural energy.
double energy_identity_residual(const Trajectory& traj);

// (x, v) -> (v, M^{-1}(-K x - s D v))
State apply_generator(const DiscreteSystem& sys, const State& y, double damping_sign = 1.0);

void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace rnc
