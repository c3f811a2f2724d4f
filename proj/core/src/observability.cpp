#include "rnc/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rnc/errors.hpp"
#include "rnc/quadrature.hpp"

namespace rnc {

std::string to_string(NormKind kind) { return kind == NormKind::H ? "H" : "H_minus_1"; }

NormKind observability_norm(BoundaryKind bc) {
  return bc == BoundaryKind::MixedMixed ? NormKind::H_minus_1 : NormKind::H;
}

double natural_norm(const DiscreteSystem& sys, const State& y) {
  return std::sqrt(2.0 * energy(sys, y, EnergyKind::natural));
}

double state_norm(const DiscreteSystem& sys, const State& y, NormKind kind) {
  if (kind == NormKind::H) {
    const EnergyKind ek =
        sys.bc == BoundaryKind::HingedNeumann ? EnergyKind::higher : EnergyKind::natural;
    return std::sqrt(2.0 * energy(sys, y, ek));
  }
  const Eigen::VectorXd mv = sys.mass * y.v;
  return std::sqrt(std::max(0.0, y.x.dot(sys.mass * y.x) + mv.dot(sys.solve_stiffness(mv))));
}

std::vector<double> cumulative_trace_energy(const Trajectory& tr) {
  if (tr.channels.cols() == 0) throw ValidationError("trajectory carries no trace channels");
  const Eigen::Index n = tr.channels.rows();
  std::vector<double> out(n, 0.0);
  double prev = tr.channels.row(0).squaredNorm();
  for (Eigen::Index k = 1; k < n; ++k) {
    const double cur = tr.channels.row(k).squaredNorm();
    out[k] = out[k - 1] + 0.5 * (tr.times[k] - tr.times[k - 1]) * (prev + cur);
    prev = cur;
  }
  return out;
}

double trace_energy(const Trajectory& tr) { return cumulative_trace_energy(tr).back(); }

std::vector<State> draw_ensemble(const ModalBasis& modes, const EnsembleSpec& spec) {
  if (spec.n_samples < 1) throw ValidationError("ensemble needs at least one sample");
  if (spec.mode_band < 1 || spec.mode_band > modes.count())
    throw ValidationError("mode_band exceeds the available modes");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<State> out;
  const Eigen::Index n = modes.phi.rows();
  for (int s = 0; s < spec.n_samples; ++s) {
    State y = State::zero(n);
    for (int k = 0; k < spec.mode_band; ++k) {
      const double a = normal(rng), b = normal(rng);
      y.x += a * modes.phi.col(k);
      y.v += (b * modes.omega(k)) * modes.phi.col(k);
    }
    out.push_back(std::move(y));
  }
  return out;
}

ObservabilityReport estimate_constants(const DiscreteSystem& sys, double T, double dt,
                                       const std::vector<State>& samples,
                                       const EnsembleSpec& spec) {
  if (samples.empty()) throw ValidationError("empty ensemble");
  ObservabilityReport r;
  r.bc = sys.bc;
  r.T = T;
  r.dt = dt;
  r.n_samples = static_cast<int>(samples.size());
  r.norm_kind = observability_norm(sys.bc);
  r.ensemble = spec;
  r.ensemble.n_samples = r.n_samples;
  r.tau_used = min_control_time(sys.stack, TauInterpretation::physical);
  const int n = steps_for(T, dt);
  Stepper st(sys, dt);
  for (const auto& y0 : samples) {
    const double nrm = state_norm(sys, y0, r.norm_kind);
    if (!(nrm > 0.0)) throw ValidationError("ensemble sample has zero norm");
    const Trajectory tr = integrate(st, y0, n);
    r.ratios.push_back(trace_energy(tr) / (nrm * nrm));
  }
  auto mn = std::min_element(r.ratios.begin(), r.ratios.end());
  auto mx = std::max_element(r.ratios.begin(), r.ratios.end());
  r.ratio_min = *mn;
  r.ratio_max = *mx;
  r.argmin = static_cast<int>(mn - r.ratios.begin());
  r.argmax = static_cast<int>(mx - r.ratios.begin());
  return r;
}

ObservabilityReport estimate_constants(const DiscreteSystem& sys, double T, double dt,
                                       const EnsembleSpec& spec) {
  const ModalBasis modes = undamped_modes(sys, spec.mode_band);
  return estimate_constants(sys, T, dt, draw_ensemble(modes, spec), spec);
}

SweepTable time_sweep(const DiscreteSystem& sys, const std::vector<double>& T_grid, double dt,
                      const std::vector<State>& samples) {
  if (T_grid.empty()) throw ValidationError("empty T grid");
  for (std::size_t i = 1; i < T_grid.size(); ++i)
    if (!(T_grid[i] > T_grid[i - 1])) throw ValidationError("T grid must be increasing");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  std::vector<int> idx;
  for (double T : T_grid) idx.push_back(std::max(1, static_cast<int>(std::lround(T / dt))));
  const NormKind kind = observability_norm(sys.bc);
  SweepTable tab;
  tab.bc = sys.bc;
  tab.tau = min_control_time(sys.stack, TauInterpretation::physical);
  tab.rows.resize(T_grid.size());
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    tab.rows[i].T = idx[i] * dt;
    tab.rows[i].ratio_min = std::numeric_limits<double>::infinity();
    tab.rows[i].ratio_max = 0.0;
  }
  Stepper st(sys, dt);
  for (const auto& y0 : samples) {
    const double nrm = state_norm(sys, y0, kind);
    if (!(nrm > 0.0)) throw ValidationError("ensemble sample has zero norm");
    const auto cum = cumulative_trace_energy(integrate(st, y0, idx.back()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double r = cum[idx[i]] / (nrm * nrm);
      tab.rows[i].ratio_min = std::min(tab.rows[i].ratio_min, r);
      tab.rows[i].ratio_max = std::max(tab.rows[i].ratio_max, r);
    }
  }
  return tab;
}

SweepTable time_sweep(const DiscreteSystem& sys, const std::vector<double>& T_grid, double dt,
                      const EnsembleSpec& spec) {
  const ModalBasis modes = undamped_modes(sys, spec.mode_band);
  return time_sweep(sys, T_grid, dt, draw_ensemble(modes, spec));
}

DirectCheck direct_inequality_check(const DiscreteSystem& sys, const Eigen::VectorXd& load,
                                    const Eigen::VectorXd& signal, double T, double dt) {
  const int n = steps_for(T, dt);
  if (signal.size() != n + 1) throw ValidationError("forcing signal does not match the grid");
  DirectCheck out;
  double l1 = 0.0;
  for (int k = 0; k < n; ++k) l1 += 0.5 * dt * (std::abs(signal(k)) + std::abs(signal(k + 1)));
  const State f{Eigen::VectorXd::Zero(sys.size()), sys.solve_mass(load)};
  out.forcing_norm = l1 * state_norm(sys, f, observability_norm(sys.bc));
  if (!(out.forcing_norm > 0.0)) {
    out.zero_forcing = true;
    return out;
  }
  Inputs in;
  in.body_load = load;
  in.body_signal = signal;
  out.trace_energy = trace_energy(integrate(sys, State::zero(sys.size()), T, dt, in));
  out.ratio = out.trace_energy / (out.forcing_norm * out.forcing_norm);
  return out;
}

Eigen::VectorXd transverse_load(const DiscreteSystem& sys, const std::function<double(double)>& f) {
  const QuadGrid g = quadrature_grid(sys.mesh, 8);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(sys.layout.n_full());
  for (std::size_t q = 0; q < g.size(); ++q) {
    const int e = g.element[q];
    const auto N = hermite_basis(g.t[q], sys.mesh.element_length(e), 0);
    const double fq = f(g.x[q]) * g.w[q];
    for (int a = 0; a < 4; ++a) full(2 * e + a) += N[a] * fq;
  }
  return sys.T.transpose() * full;
}

State localized_state(const DiscreteSystem& sys, double width) {
  if (!(width > 0.0)) throw ValidationError("localized_state: width must be positive");
  const double pi = std::numbers::pi;
  // s(x) = sin^4(pi x / width) on [0, width]
  auto s0 = [&](double x) {
    if (x >= width) return 0.0;
    const double sn = std::sin(pi * x / width);
    return sn * sn * sn * sn;
  };
  auto s1 = [&](double x) {
    if (x >= width) return 0.0;
    const double a = pi * x / width;
    return 4.0 * std::pow(std::sin(a), 3) * std::cos(a) * pi / width;
  };
  const auto& L = sys.layout;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(L.n_full());
  for (int i = 0; i <= L.n_elements; ++i) {
    const double x = sys.mesh.nodes[i];
    full(L.w_value(i)) = s0(x);
    full(L.w_slope(i)) = s1(x);
  }
  const int p = L.y_order;
  for (int layer = 0; layer < L.n_layers; ++layer)
    for (int e = 0; e < L.n_elements; ++e)
      for (int a = 0; a <= p; ++a) {
        const double x = sys.mesh.nodes[e] + sys.mesh.element_length(e) * a / p;
        full(L.y_begin(layer) + p * e + a) = width * s1(x) / (layer + 1.0);
      }
  return {sys.restrict_full(full), Eigen::VectorXd::Zero(sys.size())};
}

}  // namespace rnc
