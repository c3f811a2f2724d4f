#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "rnc/csv.hpp"
#include "rnc/errors.hpp"

namespace rnc::cli {

namespace {

DiscreteSystem build_system(const ExperimentConfig& cfg) { return assemble(cfg.stack, cfg.mesh, cfg.bc); }

void require_horizon(const ExperimentConfig& cfg) {
  if (!(cfg.T > 0.0)) throw ValidationError("time.T or time.T_over_tau is required for this command");
}

Json header(const ExperimentConfig& cfg, const std::string& command) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["boundary"] = short_name(cfg.bc);
  j["n_core"] = cfg.stack.n_core;
  j["n_elements"] = cfg.mesh.n_elements();
  j["tau"] = min_control_time(cfg.stack, TauInterpretation::physical);
  return j;
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

State initial_state(const DiscreteSystem& sys, const InitialSpec& spec, std::uint64_t seed) {
  if (spec.kind == "localized") return localized_state(sys, spec.width);
  if (spec.kind == "random") {
    const int band = std::min<int>(spec.band, static_cast<int>(sys.size()));
    return draw_ensemble(undamped_modes(sys, band), {1, seed, band}).front();
  }
  const int top = *std::max_element(spec.modes.begin(), spec.modes.end());
  if (top > sys.size()) throw ValidationError("initial.modes: index exceeds the number of dofs");
  const ModalBasis mb = undamped_modes(sys, top);
  State y = State::zero(sys.size());
  for (std::size_t i = 0; i < spec.modes.size(); ++i) {
    const int k = spec.modes[i] - 1;
    y.x += spec.displacement[i] * mb.phi.col(k);
    if (!spec.velocity.empty()) y.v += (spec.velocity[i] * mb.omega(k)) * mb.phi.col(k);
  }
  if (y.x.squaredNorm() + y.v.squaredNorm() == 0.0) throw ValidationError("initial: data is identically zero");
  return y;
}

void run_simulate(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log) {
  require_horizon(cfg);
  const DiscreteSystem sys = build_system(cfg);
  const State y0 = initial_state(sys, cfg.initial, cfg.seed);
  const Trajectory tr = integrate(sys, y0, cfg.T, cfg.dt);

  std::ostringstream csv;
  write_csv(csv, tr);
  out.write_text("trajectory.csv", csv.str());

  const double e0 = tr.energy.front();
  double drift = 0.0;
  for (double e : tr.energy) drift = std::max(drift, std::abs(e - e0));
  Json j = header(cfg, "simulate");
  j["T"] = cfg.T;
  j["dt"] = cfg.dt;
  j["steps"] = cfg.steps;
  j["damped"] = cfg.stack.damped();
  j["energy_initial"] = e0;
  j["energy_final"] = tr.energy.back();
  j["max_relative_energy_drift"] = e0 > 0 ? drift / e0 : drift;
  j["energy_identity_residual"] = e0 > 0 ? energy_identity_residual(tr) / e0 : energy_identity_residual(tr);
  j["dissipation"] = tr.dissipation.back();
  j["channels"] = tr.channel_names;
  out.write_json("simulate.json", j);
  log << "simulate: " << tr.times.size() << " samples, relative energy drift "
      << format_number(j["max_relative_energy_drift"].get<double>()) << "\n";
}

void run_eigen(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log) {
  const DiscreteSystem sys = build_system(cfg);
  const int count = std::min<int>(cfg.eigen_count, static_cast<int>(sys.size()));
  const auto pairs = eigenpairs(sys, count, cfg.eigen_damping);
  const auto margins = mode_margins(sys, pairs, sys.observation(1.0));

  std::ostringstream csv;
  csv << "index,re,im,abs,residual,margin\n";
  double max_res = 0.0, max_re = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    csv << k << ',' << format_number(p.lambda.real()) << ',' << format_number(p.lambda.imag()) << ','
        << format_number(std::abs(p.lambda)) << ',' << format_number(p.residual) << ','
        << format_number(margins[k]) << '\n';
    max_res = std::max(max_res, p.residual);
    max_re = std::max(max_re, std::abs(p.lambda.real()) / std::abs(p.lambda));
  }
  out.write_text("eigen.csv", csv.str());

  Json j = header(cfg, "eigen");
  j["pairs"] = count;
  j["damping"] = cfg.eigen_damping && cfg.stack.damped();
  j["uniqueness_margin"] = *std::min_element(margins.begin(), margins.end());
  j["max_residual"] = max_res;
  j["max_abs_real_over_abs"] = max_re;
  j["observed"] = sys.observed_forward.names;
  out.write_json("eigen.json", j);
  log << "eigen: " << pairs.size() << " eigenvalues, uniqueness margin "
      << format_number(j["uniqueness_margin"].get<double>()) << "\n";
}

void run_observe(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log) {
  require_horizon(cfg);
  const DiscreteSystem sys = build_system(cfg);
  EnsembleSpec spec = cfg.ensemble;
  spec.mode_band = std::min<int>(spec.mode_band, static_cast<int>(sys.size()));
  const ObservabilityReport r = estimate_constants(sys, cfg.T, cfg.dt, spec);

  std::ostringstream csv;
  csv << "sample,ratio\n";
  for (std::size_t k = 0; k < r.ratios.size(); ++k) csv << k << ',' << format_number(r.ratios[k]) << '\n';
  out.write_text("observe_ratios.csv", csv.str());

  Json j = header(cfg, "observe");
  j["T"] = r.T;
  j["dt"] = r.dt;
  j["T_over_tau"] = r.T / r.tau_used;
  j["norm"] = to_string(r.norm_kind);
  j["samples"] = r.n_samples;
  j["mode_band"] = r.ensemble.mode_band;
  j["seed"] = r.ensemble.seed;
  j["ratio_min"] = r.ratio_min;
  j["ratio_max"] = r.ratio_max;
  j["argmin"] = r.argmin;
  j["argmax"] = r.argmax;
  out.write_json("observe.json", j);
  log << "observe: ratio_min " << format_number(r.ratio_min) << ", ratio_max " << format_number(r.ratio_max)
      << "\n";
}

void run_sweep(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log) {
  if (cfg.T_grid.empty()) throw ValidationError("sweep.T or sweep.T_over_tau is required for sweep");
  const DiscreteSystem sys = build_system(cfg);
  const double dt = cfg.dt > 0.0 ? cfg.dt : cfg.T_grid.back() / cfg.steps;
  EnsembleSpec spec = cfg.ensemble;
  spec.mode_band = std::min<int>(spec.mode_band, static_cast<int>(sys.size()));
  const SweepTable tab = time_sweep(sys, cfg.T_grid, dt, spec);

  std::ostringstream csv;
  csv << "T,T_over_tau,ratio_min,ratio_max\n";
  for (const auto& row : tab.rows)
    csv << format_number(row.T) << ',' << format_number(row.T / tab.tau) << ',' << format_number(row.ratio_min)
        << ',' << format_number(row.ratio_max) << '\n';
  out.write_text("sweep.csv", csv.str());

  bool monotone = true;
  for (std::size_t i = 1; i < tab.rows.size(); ++i)
    monotone = monotone && tab.rows[i].ratio_min >= tab.rows[i - 1].ratio_min;
  Json j = header(cfg, "sweep");
  j["dt"] = dt;
  j["samples"] = spec.n_samples;
  j["mode_band"] = spec.mode_band;
  j["seed"] = spec.seed;
  j["norm"] = to_string(observability_norm(cfg.bc));
  j["horizons"] = tab.rows.size();
  j["ratio_min_monotone"] = monotone;
  out.write_json("sweep.json", j);
  log << "sweep: " << tab.rows.size() << " horizons, monotone " << (monotone ? "yes" : "no") << "\n";
}

void run_control(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log) {
  require_horizon(cfg);
  const DiscreteSystem sys = build_system(cfg);
  check_control_time(sys, cfg.T, cfg.hum);
  HumOptions opt = cfg.hum;
  opt.filter_band = std::min<int>(opt.filter_band, static_cast<int>(sys.size()));
  const HumOperator op(sys, cfg.T, cfg.dt, opt.filter_band);
  const State target = initial_state(sys, cfg.initial, cfg.seed);
  const ControlSolution sol = synthesize_control(op, target, opt);
  const SteeringResult sr = verify_steering(op, target, sol);

  std::ostringstream controls, steering;
  write_controls_csv(controls, sol);
  write_csv(steering, sr.trajectory);
  out.write_text("controls.csv", controls.str());
  out.write_text("steering.csv", steering.str());

  Json j = header(cfg, "control");
  j["T"] = sol.T;
  j["dt"] = sol.dt;
  j["filter_band"] = sol.filter_band;
  j["method"] = sol.method;
  j["krylov_iterations"] = sol.krylov_iters;
  j["krylov_residual"] = sol.krylov_residual;
  j["residual_history"] = sol.residual_history;
  j["min_rayleigh"] = sol.min_rayleigh;
  j["coercivity_flag"] = sol.coercivity_flag;
  j["inputs"] = sol.input_names;
  j["control_l2"] = to_json(sol.control_l2);
  j["initial_norm"] = sol.initial_norm;
  j["final_norm"] = sol.final_norm;
  j["ratio"] = sol.ratio;
  j["tol"] = opt.tol;
  j["success"] = sol.success;
  out.write_json("control.json", j);
  log << "control: " << sol.method << " in " << sol.krylov_iters << " iterations, steering ratio "
      << format_number(sol.ratio) << "\n";
  if (!sol.success)
    throw SolverError(sol.coercivity_flag ? "coercivity failure: Gramian lost positivity on the band"
                                          : "steering ratio " + format_number(sol.ratio) + " exceeds tol " +
                                                format_number(opt.tol));
}

}  // namespace rnc::cli
