#include "rnc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rnc/csv.hpp"
#include "rnc/errors.hpp"

namespace rnc {

Stepper::Stepper(const DiscreteSystem& sys, double dt) : sys_(&sys), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  auto factor = [&](double sk) {
    SpMat S = sys.mass + (0.25 * dt * dt) * sys.stiffness;
    if (sys.damping.nonZeros() > 0) S += (0.5 * sk) * sys.damping;
    auto f = std::make_shared<Solver>(S);
    if (f->info() != Eigen::Success) throw SolverError("step matrix factorization failed");
    return f;
  };
  plus_ = factor(dt);
  minus_ = sys.damping.nonZeros() > 0 ? factor(-dt) : plus_;
}

void Stepper::step(State& y, int direction, double damping_sign, const Eigen::VectorXd* fx,
                   const Eigen::VectorXd* load) const {
  const DiscreteSystem& s = *sys_;
  const double k = direction * dt_;
  const double sk = damping_sign * k;
  Eigen::VectorXd w = (0.25 * k * k) * y.v + k * y.x;
  if (fx) w += (0.5 * k * k) * (*fx);
  Eigen::VectorXd rhs = s.mass * y.v - s.stiffness * w;
  if (s.damping.nonZeros() > 0) rhs -= (0.5 * sk) * (s.damping * y.v);
  if (load) rhs += k * (*load);
  Eigen::VectorXd v_new = (sk >= 0.0 ? plus_ : minus_)->solve(rhs);
  y.x += (0.5 * k) * (y.v + v_new);
  if (fx) y.x += k * (*fx);
  y.v = std::move(v_new);
}

int steps_for(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ValidationError("T and dt must be positive");
  const double r = T / dt;
  const double n = std::round(r);
  if (n < 1 || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw ValidationError("T must be an integer multiple of dt");
  return static_cast<int>(n);
}

namespace {

void check_inputs(const DiscreteSystem& s, const Inputs& in, int n_steps) {
  if (in.controls.size() > 0 &&
      (in.controls.rows() != n_steps + 1 || in.controls.cols() != s.n_inputs()))
    throw ValidationError("control samples do not match the integration grid");
  if (in.body_load.size() > 0) {
    if (in.body_load.size() != s.size()) throw ValidationError("body load has wrong size");
    if (in.body_signal.size() != n_steps + 1)
      throw ValidationError("body signal does not match the integration grid");
  }
}

// Step averages of the input terms between samples a and b.
struct StepForcing {
  Eigen::VectorXd fx, load;
  bool has_fx = false, has_load = false;
};

StepForcing forcing_between(const DiscreteSystem& s, const Inputs& in, int a, int b) {
  StepForcing f;
  if (in.controls.size() > 0) {
    const Eigen::VectorXd u = 0.5 * (in.controls.row(a) + in.controls.row(b)).transpose();
    f.load = s.control_v * u;
    f.has_load = true;
    if (s.bc == BoundaryKind::ClampedDirichlet && s.damping.nonZeros() > 0) {
      f.fx = s.control_x * u;
      f.has_fx = true;
    }
  }
  if (in.body_load.size() > 0) {
    const double amp = 0.5 * (in.body_signal(a) + in.body_signal(b));
    if (f.has_load)
      f.load += amp * in.body_load;
    else
      f.load = amp * in.body_load;
    f.has_load = true;
  }
  return f;
}

struct Recorder {
  const DiscreteSystem& s;
  double sign;
  IntegrateOptions opt;
  Trajectory& tr;
  bool higher;

  void record(const State& y) {
    tr.energy.push_back(energy(s, y, EnergyKind::natural));
    if (higher) tr.energy_higher.push_back(energy(s, y, EnergyKind::higher));
    if (opt.store_states) tr.states.push_back(y);
  }
};

Trajectory run(const Stepper& st, const State& start, int n_steps, const Inputs& in,
               IntegrateOptions opt, int direction, double sign) {
  const DiscreteSystem& s = st.system();
  if (start.x.size() != s.size() || start.v.size() != s.size())
    throw ValidationError("state does not conform to the dof layout");
  if (n_steps < 1) throw ValidationError("need at least one time step");
  check_inputs(s, in, n_steps);

  Trajectory tr;
  tr.bc = s.bc;
  tr.dt = st.dt();
  tr.damping_sign = sign;
  const Observation& obs = s.observation(sign);
  tr.channel_names = opt.record_traces ? obs.names : std::vector<std::string>{};
  if (opt.record_traces) tr.channels.resize(n_steps + 1, obs.names.size());
  Recorder rec{s, sign, opt, tr, s.bc == BoundaryKind::HingedNeumann};

  std::vector<double> dissip_step(n_steps, 0.0);
  State y = start;
  const bool damped = s.damping.nonZeros() > 0;
  double vdv = damped ? y.v.dot(s.damping * y.v) : 0.0;
  auto row_of = [&](int k) { return direction > 0 ? k : n_steps - k; };

  rec.record(y);
  if (opt.record_traces) tr.channels.row(row_of(0)) = obs.apply(y).transpose();
  for (int k = 0; k < n_steps; ++k) {
    const int a = direction > 0 ? k : n_steps - k;
    const int b = direction > 0 ? k + 1 : n_steps - k - 1;
    StepForcing f = forcing_between(s, in, a, b);
    st.step(y, direction, sign, f.has_fx ? &f.fx : nullptr, f.has_load ? &f.load : nullptr);
    if (!y.v.allFinite() || !y.x.allFinite()) throw SolverError("non-finite state during integration");
    const double vdv_new = damped ? y.v.dot(s.damping * y.v) : 0.0;
    dissip_step[direction > 0 ? k : n_steps - k - 1] = 0.5 * st.dt() * (vdv + vdv_new);
    vdv = vdv_new;
    rec.record(y);
    if (opt.record_traces) tr.channels.row(row_of(k + 1)) = obs.apply(y).transpose();
  }

  if (direction < 0) {
    std::reverse(tr.energy.begin(), tr.energy.end());
    std::reverse(tr.energy_higher.begin(), tr.energy_higher.end());
    std::reverse(tr.states.begin(), tr.states.end());
    tr.initial = y;
    tr.final = start;
  } else {
    tr.initial = start;
    tr.final = y;
  }
  tr.times.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) tr.times[k] = k * st.dt();
  tr.dissipation.assign(n_steps + 1, 0.0);
  for (int k = 0; k < n_steps; ++k) tr.dissipation[k + 1] = tr.dissipation[k] + dissip_step[k];
  return tr;
}

}  // namespace

Trajectory integrate(const Stepper& st, const State& y0, int n_steps, const Inputs& in,
                     IntegrateOptions opt) {
  return run(st, y0, n_steps, in, opt, +1, +1.0);
}

Trajectory integrate(const DiscreteSystem& sys, const State& y0, double T, double dt,
                     const Inputs& in, IntegrateOptions opt) {
  const int n = steps_for(T, dt);
  Stepper st(sys, dt);
  return integrate(st, y0, n, in, opt);
}

Trajectory adjoint_integrate(const Stepper& st, const State& zT, int n_steps,
                             IntegrateOptions opt) {
  return run(st, zT, n_steps, {}, opt, -1, -1.0);
}

Trajectory adjoint_integrate(const DiscreteSystem& sys, const State& zT, double T, double dt,
                             IntegrateOptions opt) {
  const int n = steps_for(T, dt);
  Stepper st(sys, dt);
  return adjoint_integrate(st, zT, n, opt);
}

State integrate_backward(const Stepper& st, const State& yT, int n_steps, const Inputs& in) {
  const DiscreteSystem& s = st.system();
  check_inputs(s, in, n_steps);
  State y = yT;
  for (int k = n_steps; k > 0; --k) {
    StepForcing f = forcing_between(s, in, k, k - 1);
    st.step(y, -1, +1.0, f.has_fx ? &f.fx : nullptr, f.has_load ? &f.load : nullptr);
  }
  return y;
}

double energy_identity_residual(const Trajectory& tr) {
  if (tr.energy.empty()) return 0.0;
  return tr.energy.back() - tr.energy.front() + tr.damping_sign * tr.dissipation.back();
}

State apply_generator(const DiscreteSystem& s, const State& y, double sign) {
  Eigen::VectorXd r = -(s.stiffness * y.x);
  if (s.damping.nonZeros() > 0) r -= sign * (s.damping * y.v);
  return {y.v, s.solve_mass(r)};
}

void write_csv(std::ostream& os, const Trajectory& tr) {
  const bool higher = !tr.energy_higher.empty();
  os << "time,energy";
  if (higher) os << ",energy_higher";
  for (const auto& n : tr.channel_names) os << ',' << n;
  os << ",dissipation\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << format_number(tr.times[k]) << ',' << format_number(tr.energy[k]);
    if (higher) os << ',' << format_number(tr.energy_higher[k]);
    for (Eigen::Index c = 0; c < tr.channels.cols(); ++c)
      os << ',' << format_number(tr.channels(static_cast<Eigen::Index>(k), c));
    os << ',' << format_number(tr.dissipation[k]) << '\n';
  }
}

}  // namespace rnc
