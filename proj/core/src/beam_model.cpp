#include "rnc/beam_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rnc/errors.hpp"

namespace rnc {

bool LayerStack::damped() const {
  return std::any_of(damping_even.begin(), damping_even.end(), [](double g) { return g != 0.0; });
}

LayerStack unit_stack(int n_core, double length) {
  LayerStack s;
  s.n_core = n_core;
  s.length = length;
  s.thicknesses.assign(2 * n_core + 1, 1.0);
  s.densities_odd.assign(n_core + 1, 1.0);
  s.youngs_odd.assign(n_core + 1, 1.0);
  s.shear_even.assign(n_core, 1.0);
  s.damping_even.assign(n_core, 0.0);
  return s;
}

namespace {

void check_sized(std::vector<Diagnostic>& out, const char* field, const std::vector<double>& v,
                 std::size_t expected, bool allow_zero) {
  if (v.size() != expected) {
    std::ostringstream os;
    os << "expected " << expected << " entries, got " << v.size();
    out.push_back({field, os.str()});
    return;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool ok = std::isfinite(v[i]) && (allow_zero ? v[i] >= 0.0 : v[i] > 0.0);
    if (!ok) {
      std::ostringstream os;
      os << "entry " << i << " = " << v[i] << " must be " << (allow_zero ? "nonnegative" : "positive");
      out.push_back({field, os.str()});
      return;
    }
  }
}

void check_positive(std::vector<Diagnostic>& out, const char* field, double x) {
  if (!(std::isfinite(x) && x > 0.0)) {
    std::ostringstream os;
    os << "value " << x << " must be positive";
    out.push_back({field, os.str()});
  }
}

}  // namespace

std::vector<Diagnostic> validate(const LayerStack& s) {
  std::vector<Diagnostic> out;
  if (s.n_core < 1) {
    out.push_back({"n_core", "must be a positive integer"});
    return out;
  }
  const auto n = static_cast<std::size_t>(s.n_core);
  check_positive(out, "length", s.length);
  check_sized(out, "thicknesses", s.thicknesses, 2 * n + 1, false);
  check_sized(out, "densities_odd", s.densities_odd, n + 1, false);
  check_sized(out, "youngs_odd", s.youngs_odd, n + 1, false);
  check_sized(out, "shear_even", s.shear_even, n, true);
  check_sized(out, "damping_even", s.damping_even, n, true);
  check_positive(out, "mass_coeff", s.mass_coeff);
  check_positive(out, "rotary_coeff", s.rotary_coeff);
  check_positive(out, "bending_stiffness", s.bending_stiffness);
  return out;
}

void require_valid(const LayerStack& stack) {
  auto diags = validate(stack);
  if (diags.empty()) return;
  std::ostringstream os;
  os << "invalid layer stack:";
  for (const auto& d : diags) os << " [" << d.field << ": " << d.message << "]";
  throw ValidationError(os.str());
}

CouplingMatrices build_coupling(const LayerStack& s) {
  require_valid(s);
  const int m = s.n_core;
  CouplingMatrices c;
  c.A = Eigen::MatrixXd::Zero(m, m + 1);
  c.B = Eigen::MatrixXd::Zero(m, m + 1);
  c.N = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    // 1-based (i+1, j+1): sign (-1)^{i+j+1} gives -1 on the diagonal, +1 above it
    c.A(i, i) = 0.5;
    c.A(i, i + 1) = 0.5;
    c.B(i, i) = -1.0;
    c.B(i, i + 1) = 1.0;
    double acc = 0.0;
    for (int j = 0; j < m + 1; ++j) acc += c.A(i, j) * s.h_odd(j);
    c.N(i) = acc / s.h_even(i) + 1.0;
  }
  return c;
}

double min_control_time(const LayerStack& s, TauInterpretation interpretation) {
  require_valid(s);
  const double beam = std::sqrt(s.bending_stiffness / s.rotary_coeff);
  double slowest = beam;
  double literal = beam;
  for (int i = 0; i < s.n_odd(); ++i) {
    slowest = std::min(slowest, std::sqrt(s.youngs_odd[i] / s.densities_odd[i]));
    literal = std::min(literal, std::sqrt(s.densities_odd[i] / s.youngs_odd[i]));
  }
  const double denom = interpretation == TauInterpretation::physical ? slowest : literal;
  return 2.0 * s.length / denom;
}

std::string to_string(TauInterpretation interpretation) {
  return interpretation == TauInterpretation::physical ? "physical" : "literal";
}

}  // namespace rnc
