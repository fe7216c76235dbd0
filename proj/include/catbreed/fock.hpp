#pragma once

#include <Eigen/Dense>
#include <vector>

#include "catbreed/common.hpp"
#include "catbreed/wigner_grid.hpp"

namespace catbreed {

// Orthonormal Hermite function phi_n(x) in internal units
// (phi_0(x) = pi^{-1/4} exp(-x^2/2)), three-term recurrence.
double hermite_wavefunction(int n, double x);

// phi_0..phi_nmax at a single point.
std::vector<double> hermite_wavefunctions(int nmax, double x);

struct FockVector {
  Eigen::VectorXcd amps;  // index = photon number, size cutoff+1

  int cutoff() const { return static_cast<int>(amps.size()) - 1; }
  double norm2() const { return amps.squaredNorm(); }
  void normalize();
  int max_populated(double tol = 1e-14) const;

  static FockVector fock(int n, int cutoff);
  static FockVector vacuum(int cutoff) { return fock(0, cutoff); }
};

enum class Parity { Even, Odd };

struct SqueezedCatSpec {
  double alpha = 0.0;
  double s = 1.0;  // x-quadrature squeeze factor, s > 1 compresses x
  Parity parity = Parity::Even;
};

// Squeeze convention: psi(x) = sqrt(s) * psi_cat(s*x) up to normalization,
// i.e. the wavefunction argument is scaled by s. This is the convention
// under which the n=1 bred state has ~0.99 fidelity with the
// (alpha=1.63, s=1.52) even cat.
inline constexpr const char* kSqueezeConventionTag = "x-scale";

FockVector make_squeezed_cat(const SqueezedCatSpec& spec, int cutoff);

using DensityMatrix = Eigen::MatrixXcd;

DensityMatrix pure_density(const FockVector& v);

// Throws DomainError if rho is not Hermitian/unit-trace/PSD within tolerances.
void validate_density(const DensityMatrix& rho, double herm_tol = 1e-8,
                      double trace_tol = 1e-8, double eig_tol = 1e-7);

// Uhlmann fidelity F = Tr^2 sqrt(sqrt(a) b sqrt(a)).
double fidelity(const DensityMatrix& a, const DensityMatrix& b);
// Pure-vs-mixed shortcut <psi|rho|psi>.
double fidelity(const FockVector& psi, const DensityMatrix& rho);

struct TwoModeState {
  Eigen::MatrixXcd coeff;  // coeff(n0, n1) over |n0, n1>
  double norm2() const { return coeff.squaredNorm(); }
};

// Two-mode beamsplitter, convention a -> sqrt(t) c + sqrt(1-t) d,
// b -> sqrt(1-t) c - sqrt(t) d, so |1,1> at t=1/2 maps to
// (|2,0> - |0,2>)/sqrt(2).
TwoModeState beamsplitter_2mode(const FockVector& a, const FockVector& b,
                                double transmittance);

// Contracts mode 0 against the quadrature eigenfunctional at angle theta:
// out_m = sum_n coeff(n, m) phi_n(x) e^{-i n theta}. Unnormalized; the
// squared norm is the conditional density at x.
FockVector homodyne_project(const TwoModeState& st, double x_value,
                            double theta);

enum class WindowKind { Hard, Gaussian };

struct BreedResult {
  DensityMatrix rho;
  double acceptance = 0.0;
};

// Mixes a and b on the 50:50 splitter, conditions mode 0 on
// |x| <= window (hard) or a Gaussian acceptance of std-dev window,
// integrates the projectors over the window and renormalizes.
BreedResult breed_fock(const FockVector& a, const FockVector& b,
                       double window, Units units,
                       WindowKind kind = WindowKind::Hard);

// Bernoulli (beamsplitter-with-vacuum) photon loss map.
DensityMatrix apply_loss(const DensityMatrix& rho, double eta);

enum class ExecPolicy { Serial, Parallel };

// Wigner function of a Fock-basis density matrix on a grid.
WignerGrid wigner_of_state(const DensityMatrix& rho, const GridSpec& spec,
                           ExecPolicy exec = ExecPolicy::Parallel);

// Single-point evaluation (used by both grid versions and tests).
double wigner_point(const DensityMatrix& rho, double x, double p);

// Wigner function of |m><n| at (x, p), internal units.
cd fock_wigner_kernel(int m, int n, double x, double p);

struct CatFit {
  double alpha = 0.0;
  double s = 1.0;
  double fidelity = 0.0;
  bool on_boundary = false;
};

// Grid-then-refine maximization of <cat(alpha,s)|rho|cat(alpha,s)>.
CatFit best_fit_cat(const DensityMatrix& rho, double alpha_min,
                    double alpha_max, double s_min, double s_max);

}  // namespace catbreed
