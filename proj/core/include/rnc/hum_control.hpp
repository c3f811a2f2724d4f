#pragma once

#include <string>
#include <vector>

#include "rnc/dynamics.hpp"
#include "rnc/observability.hpp"
#include "rnc/spectral.hpp"

namespace rnc {

// Transposition pairing Omega(Y, Z) = x.M q - v.M p - x.D p for Y = (x, v), Z = (p, q).
double transposition_pairing(const DiscreteSystem& sys, const State& y, const State& z);

// Controllability Gramian on a filtered modal band. Band coordinates a in R^{2*band}
// parametrize dual terminal data through the modal pairs (phi_k, 0), (0, omega_k phi_k),
// each rescaled to unit observed energy.
class HumOperator {
 public:
  HumOperator(const DiscreteSystem& sys, double T, double dt, int filter_band);

  const DiscreteSystem& system() const { return *sys_; }
  const Stepper& stepper() const { return stepper_; }
  const ModalBasis& modes() const { return modes_; }
  int dim() const { return 2 * band_; }
  int band() const { return band_; }
  int n_steps() const { return n_steps_; }
  double T() const { return T_; }

  State terminal_data(const Eigen::VectorXd& a) const;
  // Boundary controls of the dual solution from terminal_data(a), sampled on the time grid.
  Eigen::MatrixXd controls(const Eigen::VectorXd& a) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& a) const;
  // Stores Lambda column by column (dim() matrix-free applies); apply() then uses it.
  void assemble();
  bool assembled() const { return gramian_.size() > 0; }
  Eigen::VectorXd rhs(const State& target) const;
  // Trapezoidal integral of the weighted squared controls, sum_c w_c int |u_c|^2 dt.
  double control_energy(const Eigen::MatrixXd& u) const;
  // Mass-orthogonal projection onto span{phi_k : k < band} in both components.
  State project_band(const State& y) const;

 private:
  const DiscreteSystem* sys_;
  Stepper stepper_;
  ModalBasis modes_;
  int band_, n_steps_;
  double T_;
  std::vector<State> basis_terminal_;  // scaled Z_T per band coordinate
  std::vector<State> basis_initial_;   // the same dual solutions at t = 0
  std::vector<Eigen::MatrixXd> basis_controls_;  // their boundary observations
  Eigen::MatrixXd gramian_;
};

Eigen::VectorXd gramian_apply(const HumOperator& op, const Eigen::VectorXd& a);
Eigen::MatrixXd gramian_matrix(const HumOperator& op);

enum class KrylovMethod { automatic, cg, cgls };

struct HumOptions {
  int filter_band = 20;
  double tol = 1e-6;          // steering success threshold on final/initial
  double krylov_tol = 1e-12;  // relative residual
  int max_iter = 0;           // 0: 50 * dim
  KrylovMethod method = KrylovMethod::automatic;
  bool enforce_min_time = true;
};

struct ControlSolution {
  BoundaryKind bc = BoundaryKind::HingedNeumann;
  double T = 0.0, dt = 0.0;
  int filter_band = 0;
  std::string method;
  Eigen::VectorXd hum_minimizer;  // band coordinates
  State dual_terminal;
  std::vector<double> times;
  std::vector<std::string> input_names;
  Eigen::MatrixXd controls;  // rows: time samples, cols: (M, g_1, g_3, ...)
  Eigen::VectorXd control_l2;
  int krylov_iters = 0;
  double krylov_residual = 0.0;
  std::vector<double> residual_history;
  double min_rayleigh = 0.0;
  bool coercivity_flag = false;
  double initial_norm = 0.0, final_norm = 0.0, ratio = 0.0;
  bool success = false;

  Eigen::VectorXd control_M() const { return controls.col(0); }
  Eigen::MatrixXd control_g() const { return controls.rightCols(controls.cols() - 1); }
};

// Throws CoercivityError when enforce_min_time is set and T <= tau.
void check_control_time(const DiscreteSystem& sys, double T, const HumOptions& options);

ControlSolution synthesize_control(const DiscreteSystem& sys, const State& target, double T,
                                   double dt, const HumOptions& options = {});
ControlSolution synthesize_control(const HumOperator& op, const State& target,
                                   const HumOptions& options = {});

// Norm used to judge steering: natural for h-N and m-m; for c-D the H_-1 norm after
// removing the L2 component of the w-velocity inside span{exp(+-x/l)}.
double steering_norm(const DiscreteSystem& sys, const State& y);

struct SteeringResult {
  double initial_norm = 0.0, final_norm = 0.0, ratio = 0.0;
  State final_state;
  Trajectory trajectory;
};

SteeringResult verify_steering(const HumOperator& op, const State& target,
                               const ControlSolution& solution);
SteeringResult verify_steering(const DiscreteSystem& sys, const State& target,
                               const ControlSolution& solution);

// Control CSV: time, M, g1, g3, ...
void write_controls_csv(std::ostream& os, const ControlSolution& sol);

}  // namespace rnc
