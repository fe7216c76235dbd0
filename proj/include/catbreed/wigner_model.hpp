#pragma once

#include <Eigen/Dense>

#include "catbreed/common.hpp"
#include "catbreed/fock.hpp"
#include "catbreed/gausspoly.hpp"
#include "catbreed/wigner_grid.hpp"

namespace catbreed {

struct PhotonSourceParams {
  double g = 1.03;       // parametric gain
  double h = 1.0;        // excess-noise gain
  double eta_path = 1.0; // path transmission
  double xi = 1.0;       // modal purity
};

struct SinglePhotonModel {
  double sigma = 1.0;  // width, sigma >= 1
  double delta = 2.0;  // quality, in [0,2]; Wigner negative at origin iff > 1
};

// sigma^2 = 2 eta (hg - 1) + 1, delta = 2 xi eta h^2 g (g-1) / (sigma^2 (hg-1)).
SinglePhotonModel imperfect_photon_params(const PhotonSourceParams& p);

// W1(x,p) = e^{-(x^2+p^2)/sigma^2}/(pi sigma^2) [1 - delta + delta(x^2+p^2)/sigma^2]
GaussPoly imperfect_photon_wigner(const SinglePhotonModel& m);

// Closed-form joint homodyne density of the two breeding arms at relative
// phase theta.
double joint_prob_closed(double x0, double x1, double theta,
                         const SinglePhotonModel& m);

// Brute-force double quadrature of the joint-distribution integral over the
// two momentum variables; oracle for joint_prob_closed. Works for any
// single-arm Wigner function w.
double joint_prob_numeric(double x0, double x1, double theta,
                          const GaussPoly& w, int n_nodes = 120,
                          double range = 10.0);

// Gaussian-conditioned breeding convolution: mixes wa, wb on the 50:50
// splitter, conditions mode 0 with the kernel e^{-x0^2/(2 window^2)},
// integrates over the conditioned mode and renormalizes to unit integral.
// max_degree < 0 disables the cap check.
GaussPoly breed_wigner(const GaussPoly& wa, const GaussPoly& wb, double window,
                       Units units, int max_degree = -1);

// Bernoulli loss map in phase space; agrees with the Fock-route apply_loss.
GaussPoly loss_channel_wigner(const GaussPoly& w, double eta);

// Global minimum over a +-6 internal-unit box (coarse scan + refinement).
double negativity(const GaussPoly& w, ExecPolicy exec = ExecPolicy::Parallel);
double negativity(const WignerGrid& grid);
// Same scan for Fock-basis states.
double negativity(const DensityMatrix& rho,
                  ExecPolicy exec = ExecPolicy::Parallel);

// Exact 1D marginal along the quadrature at angle theta.
GaussPoly marginal(const GaussPoly& w, double theta);

// Integral of a 1D GaussPoly density over [-a, a].
double interval_mass(const GaussPoly& marg, double a);

// Analytic acceptance fraction of the conditioning window for two input
// photons wa, wb (window in internal units).
double analytic_acceptance(const GaussPoly& wa, const GaussPoly& wb,
                           double window_internal);

// Evaluate a GaussPoly Wigner function on a grid.
WignerGrid wigner_grid_of(const GaussPoly& w, const GridSpec& spec,
                          ExecPolicy exec = ExecPolicy::Parallel);

// Project a phase-space state back onto the truncated Fock basis,
// rho_mn = 2 pi <W, W_{|n><m|}> by 2D quadrature.
DensityMatrix density_matrix_from_wigner(const GaussPoly& w, int cutoff,
                                         int n_nodes = 160,
                                         double range = 8.0);

}  // namespace catbreed
