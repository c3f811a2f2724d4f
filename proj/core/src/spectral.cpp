#include "rnc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "rnc/errors.hpp"

namespace rnc {

ModalBasis undamped_modes(const DiscreteSystem& sys, int count) {
  const Eigen::Index n = sys.size();
  if (count < 1 || count > n) throw ValidationError("mode count out of range");
  const Eigen::MatrixXd K(sys.stiffness), M(sys.mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  if (es.info() != Eigen::Success) throw SolverError("generalized eigensolver did not converge");
  ModalBasis mb;
  mb.omega = es.eigenvalues().head(count).cwiseMax(0.0).cwiseSqrt();
  mb.phi = es.eigenvectors().leftCols(count);
  // fix the sign so the largest entry is positive; keeps output deterministic
  for (int k = 0; k < count; ++k) {
    Eigen::Index i;
    mb.phi.col(k).cwiseAbs().maxCoeff(&i);
    if (mb.phi(i, k) < 0) mb.phi.col(k) *= -1.0;
  }
  return mb;
}

double eigen_residual(const DiscreteSystem& sys, std::complex<double> lambda,
                      const Eigen::VectorXcd& mode, bool damping_on) {
  const Eigen::Index n = sys.size();
  const Eigen::VectorXcd U = mode.head(n), V = mode.tail(n);
  const Eigen::SparseMatrix<std::complex<double>> K = sys.stiffness.cast<std::complex<double>>();
  const Eigen::SparseMatrix<std::complex<double>> M = sys.mass.cast<std::complex<double>>();
  Eigen::VectorXcd rhs = -(K * U);
  if (damping_on && sys.damping.nonZeros() > 0)
    rhs -= sys.damping.cast<std::complex<double>>() * V;
  Eigen::VectorXcd acc(n);
  acc.real() = sys.solve_mass(rhs.real());
  acc.imag() = sys.solve_mass(rhs.imag());
  const Eigen::VectorXcd r1 = V - lambda * U, r2 = acc - lambda * V;
  auto en = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return std::sqrt(std::abs(a.dot(K * a)) + std::abs(b.dot(M * b)));
  };
  return en(r1, r2) / en(U, V);
}

std::vector<EigenPair> eigenpairs(const DiscreteSystem& sys, int count, bool damping_on) {
  const Eigen::Index n = sys.size();
  if (count < 1 || count > n) throw ValidationError("eigen count out of range");
  std::vector<EigenPair> out;
  const bool damped = damping_on && sys.damping.nonZeros() > 0;
  if (!damped) {
    const ModalBasis mb = undamped_modes(sys, count);
    for (int k = 0; k < count; ++k) {
      for (double sgn : {1.0, -1.0}) {
        EigenPair p;
        p.lambda = {0.0, sgn * mb.omega(k)};
        p.mode.resize(2 * n);
        p.mode.head(n) = mb.phi.col(k).cast<std::complex<double>>();
        p.mode.tail(n) = p.lambda * p.mode.head(n);
        out.push_back(std::move(p));
      }
    }
  } else {
    const Eigen::MatrixXd K(sys.stiffness), D(sys.damping);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    G.topRightCorner(n, n).setIdentity();
    Eigen::MatrixXd MK(n, n), MD(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      MK.col(j) = sys.solve_mass(K.col(j));
      MD.col(j) = sys.solve_mass(D.col(j));
    }
    G.bottomLeftCorner(n, n) = -MK;
    G.bottomRightCorner(n, n) = -MD;
    Eigen::EigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success) throw SolverError("eigensolver did not converge");
    const Eigen::VectorXcd lam = es.eigenvalues();
    std::vector<Eigen::Index> idx(2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double ia = std::abs(lam(a).imag()), ib = std::abs(lam(b).imag());
      if (ia != ib) return ia < ib;
      return lam(a).imag() > lam(b).imag();
    });
    for (int k = 0; k < 2 * count && k < 2 * n; ++k) {
      EigenPair p;
      p.lambda = lam(idx[k]);
      Eigen::VectorXcd y = es.eigenvectors().col(idx[k]);
      p.mode = y / y.norm();
      out.push_back(std::move(p));
    }
  }
  const Observation& obs = sys.observation(1.0);
  for (auto& p : out) {
    p.residual = eigen_residual(sys, p.lambda, p.mode, damping_on);
    const Eigen::VectorXcd o = obs.Cx.cast<std::complex<double>>() * p.mode.head(n) +
                               obs.Cv.cast<std::complex<double>>() * p.mode.tail(n);
    p.margin_traces = o.cwiseAbs();
  }
  return out;
}

namespace {

struct RayleighWave {
  double beta, gamma;
};

RayleighWave rayleigh(const LayerStack& s, double beta) {
  const double m = s.mass_coeff, a = s.rotary_coeff;
  return {beta, std::sqrt(m * beta * beta / (m + a * beta * beta))};
}

double boundary_determinant(const LayerStack& s, bool pinned_end, double beta) {
  const auto [b, g] = rayleigh(s, beta);
  const double L = s.length;
  const double c = std::cos(b * L), sn = std::sin(b * L);
  const double C = std::cosh(g * L), S = std::sinh(g * L);
  // z = c1 cos bx + c2 sin bx + c3 cosh gx + c4 sinh gx with z(0) = z'(0) = 0
  const double a11 = c - C, a12 = sn - (b / g) * S;
  double a21, a22;
  if (pinned_end) {
    a21 = -b * b * c - g * g * C;
    a22 = -b * b * sn - b * g * S;
  } else {
    a21 = -b * sn - g * S;
    a22 = b * (c - C);
  }
  return (a11 * a22 - a12 * a21) / (b * b * (1.0 + C));
}

}  // namespace

double clamped_rayleigh_wavenumber(const LayerStack& s, bool pinned_end, int k) {
  if (k < 1) throw ValidationError("mode index must be >= 1");
  const double L = s.length;
  const double step = std::numbers::pi / (64.0 * L);
  double lo = 0.5 * step;
  double flo = boundary_determinant(s, pinned_end, lo);
  int found = 0;
  for (int it = 0; it < 1000000; ++it) {
    const double hi = lo + step;
    const double fhi = boundary_determinant(s, pinned_end, hi);
    if ((flo < 0) != (fhi < 0)) {
      if (++found == k) {
        double a = lo, b = hi, fa = flo;
        for (int j = 0; j < 200 && b - a > 1e-15 * b; ++j) {
          const double mid = 0.5 * (a + b);
          const double fm = boundary_determinant(s, pinned_end, mid);
          if ((fm < 0) == (fa < 0)) {
            a = mid;
            fa = fm;
          } else {
            b = mid;
          }
        }
        return 0.5 * (a + b);
      }
    }
    lo = hi;
    flo = fhi;
  }
  throw SolverError("clamped beam root not bracketed");
}

double decoupled_frequency(const LayerStack& s, BoundaryKind bc, int block, int k) {
  require_valid(s);
  if (k < 1) throw ValidationError("mode index must be >= 1");
  const double L = s.length;
  const double pi = std::numbers::pi;
  if (block < 0) {
    double beta = 0.0;
    switch (bc) {
      case BoundaryKind::HingedNeumann: beta = k * pi / L; break;
      case BoundaryKind::ClampedDirichlet: beta = clamped_rayleigh_wavenumber(s, false, k); break;
      case BoundaryKind::MixedMixed: beta = clamped_rayleigh_wavenumber(s, true, k); break;
    }
    const double b2 = beta * beta;
    return std::sqrt(s.bending_stiffness * b2 * b2 / (s.mass_coeff + s.rotary_coeff * b2));
  }
  if (block >= s.n_odd()) throw ValidationError("layer index out of range");
  const double speed = std::sqrt(s.youngs_odd[block] / s.densities_odd[block]);
  const double beta = bc == BoundaryKind::MixedMixed ? (k - 0.5) * pi / L : k * pi / L;
  return speed * beta;
}

std::vector<double> mode_margins(const DiscreteSystem& sys, const std::vector<EigenPair>& pairs,
                                 const Observation& obs) {
  const Eigen::Index n = sys.size();
  std::vector<double> out;
  const Eigen::SparseMatrix<std::complex<double>> K = sys.stiffness.cast<std::complex<double>>();
  const Eigen::SparseMatrix<std::complex<double>> M = sys.mass.cast<std::complex<double>>();
  for (const auto& p : pairs) {
    const Eigen::VectorXcd U = p.mode.head(n), V = p.mode.tail(n);
    const Eigen::VectorXcd o = obs.Cx.cast<std::complex<double>>() * U +
                               obs.Cv.cast<std::complex<double>>() * V;
    // |E|^2_X1 = |G E|^2_X = |lambda|^2 |E|^2_X for an eigenpair
    const double x = std::abs(U.dot(K * U)) + std::abs(V.dot(M * V));
    out.push_back(o.squaredNorm() / (std::norm(p.lambda) * x));
  }
  return out;
}

double uniqueness_margin(const DiscreteSystem& sys, const std::vector<EigenPair>& pairs,
                         const Observation& obs) {
  if (pairs.empty()) throw ValidationError("uniqueness_margin: no eigenpairs");
  const auto m = mode_margins(sys, pairs, obs);
  return *std::min_element(m.begin(), m.end());
}

double uniqueness_margin(const DiscreteSystem& sys, const std::vector<EigenPair>& pairs) {
  return uniqueness_margin(sys, pairs, sys.observation(1.0));
}

}  // namespace rnc
