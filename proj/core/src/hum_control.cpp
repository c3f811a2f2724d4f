#include "rnc/hum_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rnc/csv.hpp"
#include "rnc/errors.hpp"

namespace rnc {

double transposition_pairing(const DiscreteSystem& sys, const State& y, const State& z) {
  double r = y.x.dot(sys.mass * z.v) - y.v.dot(sys.mass * z.x);
  if (sys.damping.nonZeros() > 0) r -= y.x.dot(sys.damping * z.x);
  return r;
}

namespace {

// Dual solve from terminal data; returns nodal boundary observations, row k at t_k.
Eigen::MatrixXd dual_observations(const Stepper& st, const State& zT, int n_steps,
                                  State* z0 = nullptr) {
  const DiscreteSystem& s = st.system();
  Eigen::MatrixXd u(n_steps + 1, s.n_inputs());
  State z = zT;
  u.row(n_steps) = s.control_observation(z).transpose();
  for (int k = n_steps; k > 0; --k) {
    st.step(z, -1, -1.0, nullptr, nullptr);
    u.row(k - 1) = s.control_observation(z).transpose();
  }
  if (z0) *z0 = z;
  return u;
}

// h * sum over steps of weighted products of step averages.
double midpoint_form(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& w,
                     double h) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k + 1 < a.rows(); ++k) {
    const Eigen::VectorXd am = 0.5 * (a.row(k) + a.row(k + 1)).transpose();
    const Eigen::VectorXd bm = 0.5 * (b.row(k) + b.row(k + 1)).transpose();
    acc += am.dot(w.cwiseProduct(bm));
  }
  return h * acc;
}

}  // namespace

HumOperator::HumOperator(const DiscreteSystem& sys, double T, double dt, int filter_band)
    : sys_(&sys), stepper_(sys, dt), band_(filter_band), n_steps_(steps_for(T, dt)), T_(T) {
  if (filter_band < 1 || filter_band > sys.size())
    throw ValidationError("filter_band out of range");
  modes_ = undamped_modes(sys, filter_band);
  const Eigen::Index n = sys.size();
  for (int j = 0; j < 2 * band_; ++j) {
    const int k = j % band_;
    State b = State::zero(n);
    if (j < band_)
      b.x = modes_.phi.col(k);
    else
      b.v = modes_.omega(k) * modes_.phi.col(k);
    // Z_T = J_D^{-1} J_0 b
    State zt{b.x, b.v};
    if (sys.damping.nonZeros() > 0) zt.v += sys.solve_mass(sys.damping * b.x);
    State z0;
    const Eigen::MatrixXd u = dual_observations(stepper_, zt, n_steps_, &z0);
    const double e = midpoint_form(u, u, sys.control_weight, dt);
    const double scale = e > 0.0 ? 1.0 / std::sqrt(e) : 1.0;
    basis_terminal_.push_back({scale * zt.x, scale * zt.v});
    basis_initial_.push_back({scale * z0.x, scale * z0.v});
    basis_controls_.push_back(scale * u);
  }
}

State HumOperator::terminal_data(const Eigen::VectorXd& a) const {
  if (a.size() != dim()) throw ValidationError("band coordinates have wrong size");
  State z = State::zero(sys_->size());
  for (int j = 0; j < dim(); ++j) {
    if (a(j) == 0.0) continue;
    z.x += a(j) * basis_terminal_[j].x;
    z.v += a(j) * basis_terminal_[j].v;
  }
  return z;
}

Eigen::MatrixXd HumOperator::controls(const Eigen::VectorXd& a) const {
  if (a.size() != dim()) throw ValidationError("band coordinates have wrong size");
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n_steps_ + 1, sys_->n_inputs());
  for (int j = 0; j < dim(); ++j)
    if (a(j) != 0.0) u += a(j) * basis_controls_[j];
  return u;
}

Eigen::VectorXd HumOperator::apply(const Eigen::VectorXd& a) const {
  if (assembled()) {
    if (a.size() != dim()) throw ValidationError("band coordinates have wrong size");
    return gramian_ * a;
  }
  Inputs in;
  in.controls = controls(a);
  const State y0 = integrate_backward(stepper_, State::zero(sys_->size()), n_steps_, in);
  return rhs(y0);
}

Eigen::VectorXd HumOperator::rhs(const State& target) const {
  Eigen::VectorXd r(dim());
  for (int j = 0; j < dim(); ++j) r(j) = transposition_pairing(*sys_, target, basis_initial_[j]);
  return r;
}

double HumOperator::control_energy(const Eigen::MatrixXd& u) const {
  const double h = stepper_.dt();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < u.rows(); ++k) {
    const double wk = (k == 0 || k + 1 == u.rows()) ? 0.5 : 1.0;
    acc += wk * u.row(k).cwiseAbs2().dot(sys_->control_weight.transpose());
  }
  return h * acc;
}

State HumOperator::project_band(const State& y) const {
  const Eigen::MatrixXd& P = modes_.phi;
  return {P * (P.transpose() * (sys_->mass * y.x)), P * (P.transpose() * (sys_->mass * y.v))};
}

Eigen::VectorXd gramian_apply(const HumOperator& op, const Eigen::VectorXd& a) {
  return op.apply(a);
}

void HumOperator::assemble() {
  if (assembled()) return;
  Eigen::MatrixXd G(dim(), dim());
  for (int j = 0; j < dim(); ++j) G.col(j) = apply(Eigen::VectorXd::Unit(dim(), j));
  gramian_ = std::move(G);
}

Eigen::MatrixXd gramian_matrix(const HumOperator& op) {
  Eigen::MatrixXd G(op.dim(), op.dim());
  for (int j = 0; j < op.dim(); ++j) G.col(j) = op.apply(Eigen::VectorXd::Unit(op.dim(), j));
  return G;
}

namespace {

struct KrylovResult {
  Eigen::VectorXd x;
  int iters = 0;
  double residual = 0.0;
  std::vector<double> history;
  double min_rayleigh = std::numeric_limits<double>::infinity();
  double max_rayleigh = 0.0;
  bool converged = false;
};

KrylovResult conjugate_gradient(const HumOperator& op, const Eigen::VectorXd& b, double tol,
                                int max_iter) {
  KrylovResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  const double bn = b.norm();
  Eigen::VectorXd r = b, p = b;
  double rr = r.squaredNorm();
  res.history.push_back(1.0);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd q = op.apply(p);
    const double pq = p.dot(q);
    const double rq = pq / p.squaredNorm();
    res.min_rayleigh = std::min(res.min_rayleigh, rq);
    res.max_rayleigh = std::max(res.max_rayleigh, rq);
    if (!(pq > 0.0)) break;
    const double alpha = rr / pq;
    res.x += alpha * p;
    r -= alpha * q;
    const double rr_new = r.squaredNorm();
    res.iters = it + 1;
    res.history.push_back(std::sqrt(rr_new) / bn);
    if (std::sqrt(rr_new) <= tol * bn) {
      res.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  // true residual
  res.residual = (b - op.apply(res.x)).norm() / bn;
  if (res.residual <= 10.0 * tol) res.converged = true;
  return res;
}

// Least squares on the normal equations. The Gramian is applied for both A and A^T;
// it is symmetric under the transposition pairing also with damping.
KrylovResult cgls(const HumOperator& op, const Eigen::VectorXd& b, double tol, int max_iter) {
  KrylovResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  const double bn = b.norm();
  Eigen::VectorXd r = b;
  Eigen::VectorXd s = op.apply(r);
  Eigen::VectorXd p = s;
  double gamma = s.squaredNorm();
  res.history.push_back(1.0);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd q = op.apply(p);
    const double qq = q.squaredNorm();
    const double pq = p.dot(q) / p.squaredNorm();
    res.min_rayleigh = std::min(res.min_rayleigh, pq);
    res.max_rayleigh = std::max(res.max_rayleigh, pq);
    if (!(qq > 0.0)) break;
    const double alpha = gamma / qq;
    res.x += alpha * p;
    r -= alpha * q;
    res.iters = it + 1;
    res.history.push_back(r.norm() / bn);
    if (r.norm() <= tol * bn) {
      res.converged = true;
      break;
    }
    s = op.apply(r);
    const double gamma_new = s.squaredNorm();
    p = s + (gamma_new / gamma) * p;
    gamma = gamma_new;
  }
  res.residual = (b - op.apply(res.x)).norm() / bn;
  if (res.residual <= 10.0 * tol) res.converged = true;
  return res;
}

}  // namespace

double steering_norm(const DiscreteSystem& sys, const State& y) {
  if (sys.bc != BoundaryKind::ClampedDirichlet) return natural_norm(sys, y);
  const QuadGrid grid = quadrature_grid(sys.mesh, 6);
  const Eigen::VectorXd wdot = sample_field(sys, sys.expand(y.v), -1, 0, grid);
  const QuotientSplit split = quotient_project(sys.stack, grid, wdot, QuotientSubspace::M);
  State q = y;
  q.v -= l2_project_w(sys, grid, split.component_in);
  return state_norm(sys, q, NormKind::H_minus_1);
}

void check_control_time(const DiscreteSystem& sys, double T, const HumOptions& opt) {
  if (!opt.enforce_min_time) return;
  const double tau = min_control_time(sys.stack, TauInterpretation::physical);
  if (!(T > tau))
    throw CoercivityError("coercivity failure: T = " + format_number(T) +
                          " does not exceed the minimal control time tau = " + format_number(tau));
}

ControlSolution synthesize_control(const HumOperator& op, const State& target,
                                   const HumOptions& opt) {
  const DiscreteSystem& sys = op.system();
  const double tau = min_control_time(sys.stack, TauInterpretation::physical);
  check_control_time(sys, op.T(), opt);

  ControlSolution sol;
  sol.bc = sys.bc;
  sol.T = op.T();
  sol.dt = op.stepper().dt();
  sol.filter_band = op.band();
  sol.input_names = sys.input_names();
  for (int k = 0; k <= op.n_steps(); ++k) sol.times.push_back(k * sol.dt);

  KrylovMethod method = opt.method;
  if (method == KrylovMethod::automatic)
    method = sys.damping.nonZeros() > 0 ? KrylovMethod::cgls : KrylovMethod::cg;
  sol.method = method == KrylovMethod::cg ? "cg" : "cgls";

  const State band_target = op.project_band(target);
  sol.initial_norm = steering_norm(sys, band_target);
  const Eigen::VectorXd b = op.rhs(target);
  if (b.norm() == 0.0) {
    sol.hum_minimizer = Eigen::VectorXd::Zero(op.dim());
    sol.dual_terminal = State::zero(sys.size());
    sol.controls = Eigen::MatrixXd::Zero(op.n_steps() + 1, sys.n_inputs());
    sol.control_l2 = Eigen::VectorXd::Zero(sys.n_inputs());
    sol.success = true;
    return sol;
  }

  const int max_iter = opt.max_iter > 0 ? opt.max_iter : 50 * op.dim();
  KrylovResult kr = method == KrylovMethod::cg ? conjugate_gradient(op, b, opt.krylov_tol, max_iter)
                                               : cgls(op, b, opt.krylov_tol, max_iter);
  sol.hum_minimizer = kr.x;
  sol.krylov_iters = kr.iters;
  sol.krylov_residual = kr.residual;
  sol.residual_history = kr.history;
  sol.min_rayleigh = kr.min_rayleigh;
  sol.coercivity_flag = !(kr.min_rayleigh > 1e-14 * std::max(1.0, kr.max_rayleigh)) || !(op.T() > tau);
  sol.dual_terminal = op.terminal_data(kr.x);
  sol.controls = op.controls(kr.x);
  sol.control_l2.resize(sys.n_inputs());
  for (int c = 0; c < sys.n_inputs(); ++c) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < sol.controls.rows(); ++k) {
      const double wk = (k == 0 || k + 1 == sol.controls.rows()) ? 0.5 : 1.0;
      acc += wk * sol.controls(k, c) * sol.controls(k, c);
    }
    sol.control_l2(c) = std::sqrt(acc * sol.dt);
  }

  const SteeringResult sr = verify_steering(op, target, sol);
  sol.final_norm = sr.final_norm;
  sol.ratio = sr.ratio;
  sol.success = kr.converged && sol.ratio <= opt.tol && !sol.coercivity_flag;
  if (!kr.converged)
    throw SolverError("Krylov stagnation: relative residual " + format_number(kr.residual) +
                      " after " + std::to_string(kr.iters) + " iterations");
  return sol;
}

ControlSolution synthesize_control(const DiscreteSystem& sys, const State& target, double T,
                                   double dt, const HumOptions& opt) {
  check_control_time(sys, T, opt);
  HumOperator op(sys, T, dt, opt.filter_band);
  return synthesize_control(op, target, opt);
}

SteeringResult verify_steering(const HumOperator& op, const State& target,
                               const ControlSolution& sol) {
  const DiscreteSystem& sys = op.system();
  SteeringResult r;
  Inputs in;
  in.controls = sol.controls;
  r.trajectory = integrate(op.stepper(), target, op.n_steps(), in);
  r.final_state = r.trajectory.final;
  r.initial_norm = steering_norm(sys, op.project_band(target));
  r.final_norm = steering_norm(sys, op.project_band(r.final_state));
  r.ratio = r.initial_norm > 0.0 ? r.final_norm / r.initial_norm : r.final_norm;
  return r;
}

SteeringResult verify_steering(const DiscreteSystem& sys, const State& target,
                               const ControlSolution& sol) {
  HumOperator op(sys, sol.T, sol.dt, sol.filter_band);
  return verify_steering(op, target, sol);
}

void write_controls_csv(std::ostream& os, const ControlSolution& sol) {
  os << "time";
  for (const auto& n : sol.input_names) os << ',' << n;
  os << '\n';
  for (Eigen::Index k = 0; k < sol.controls.rows(); ++k) {
    os << format_number(sol.times[k]);
    for (Eigen::Index c = 0; c < sol.controls.cols(); ++c)
      os << ',' << format_number(sol.controls(k, c));
    os << '\n';
  }
}

}  // namespace rnc
