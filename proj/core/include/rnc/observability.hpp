#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rnc/dynamics.hpp"
#include "rnc/spectral.hpp"

namespace rnc {

enum class NormKind { H, H_minus_1 };

std::string to_string(NormKind kind);
// Norm in which the initial data of the observability inequality is measured.
NormKind observability_norm(BoundaryKind bc);

// kind = H: sqrt(a(U) + c(V)), with the higher (graph) energy for h-N.
// kind = H_minus_1: H-norm of A0^{-1} y, A0 the undamped generator.
double state_norm(const DiscreteSystem& sys, const State& y, NormKind kind);
double natural_norm(const DiscreteSystem& sys, const State& y);

// Trapezoidal integral over time of the sum of squared trace channels.
double trace_energy(const Trajectory& traj);
// Running version: entry k integrates over [0, t_k].
std::vector<double> cumulative_trace_energy(const Trajectory& traj);

struct EnsembleSpec {
  int n_samples = 16;
  std::uint64_t seed = 1;
  int mode_band = 20;
};

// Random data sum_k (a_k phi_k, b_k omega_k phi_k), a, b standard normal, k <= band.
std::vector<State> draw_ensemble(const ModalBasis& modes, const EnsembleSpec& spec);

struct ObservabilityReport {
  BoundaryKind bc = BoundaryKind::HingedNeumann;
  double T = 0.0;
  double dt = 0.0;
  int n_samples = 0;
  double ratio_min = 0.0, ratio_max = 0.0;
  int argmin = -1, argmax = -1;
  NormKind norm_kind = NormKind::H;
  EnsembleSpec ensemble;
  double tau_used = 0.0;
  std::vector<double> ratios;
};

ObservabilityReport estimate_constants(const DiscreteSystem& sys, double T, double dt,
                                       const EnsembleSpec& spec);
// Explicit samples; a zero-norm sample is rejected.
ObservabilityReport estimate_constants(const DiscreteSystem& sys, double T, double dt,
                                       const std::vector<State>& samples,
                                       const EnsembleSpec& spec = {});

struct SweepRow {
  double T = 0.0, ratio_min = 0.0, ratio_max = 0.0;
};

struct SweepTable {
  BoundaryKind bc = BoundaryKind::HingedNeumann;
  double tau = 0.0;
  std::vector<SweepRow> rows;
};

// One integration per sample up to the last horizon; horizons are rounded to the dt grid.
SweepTable time_sweep(const DiscreteSystem& sys, const std::vector<double>& T_grid, double dt,
                      const EnsembleSpec& spec);
SweepTable time_sweep(const DiscreteSystem& sys, const std::vector<double>& T_grid, double dt,
                      const std::vector<State>& samples);

struct DirectCheck {
  double ratio = 0.0;
  double trace_energy = 0.0;
  double forcing_norm = 0.0;
  bool zero_forcing = false;
};

// Zero initial data, body load `load` modulated by `signal` on the dt grid. The forcing
// norm is (int |signal| dt) times the family norm of (0, M^{-1} load).
DirectCheck direct_inequality_check(const DiscreteSystem& sys, const Eigen::VectorXd& load,
                                    const Eigen::VectorXd& signal, double T, double dt);

// Consistent load of a transverse force density f(x) acting on w.
Eigen::VectorXd transverse_load(const DiscreteSystem& sys, const std::function<double(double)>& f);

// Smooth displacement supported in [0, width], zero velocity.
State localized_state(const DiscreteSystem& sys, double width);

}  // namespace rnc
