#pragma once

#include <complex>
#include <vector>

#include "rnc/fem_assembly.hpp"

namespace rnc {

// Undamped modes K phi = omega^2 M phi, M-orthonormal, ascending omega.
struct ModalBasis {
  Eigen::VectorXd omega;
  Eigen::MatrixXd phi;  // n x count

  Eigen::Index count() const { return omega.size(); }
};

ModalBasis undamped_modes(const DiscreteSystem& sys, int count);

struct EigenPair {
  std::complex<double> lambda;
  Eigen::VectorXcd mode;  // (U, V), V = lambda U
  double residual = 0.0;  // energy norm, relative
  Eigen::VectorXd margin_traces;
};

// `count` conjugate pairs with the smallest |Im lambda|, each pair listed as
// (Im >= 0, Im < 0).
std::vector<EigenPair> eigenpairs(const DiscreteSystem& sys, int count, bool damping_on);

// Energy-norm residual ||G y - lambda y|| / ||y||.
double eigen_residual(const DiscreteSystem& sys, std::complex<double> lambda,
                      const Eigen::VectorXcd& mode, bool damping_on);

// block = -1: Rayleigh beam; block = i >= 0: odd layer i as a free wave equation.
// k is 1-based.
double decoupled_frequency(const LayerStack& stack, BoundaryKind bc, int block, int k);

// k-th positive root in beta of the Rayleigh beam boundary determinant.
// pinned_end selects clamped-pinned instead of clamped-clamped.
double clamped_rayleigh_wavenumber(const LayerStack& stack, bool pinned_end, int k);

// Squared observed traces of U normalized by the X1 norm of the eigenpair state, one per pair.
std::vector<double> mode_margins(const DiscreteSystem& sys, const std::vector<EigenPair>& pairs,
                                 const Observation& obs);
double uniqueness_margin(const DiscreteSystem& sys, const std::vector<EigenPair>& pairs);
double uniqueness_margin(const DiscreteSystem& sys, const std::vector<EigenPair>& pairs,
                         const Observation& obs);

}  // namespace rnc
