#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "catbreed/common.hpp"
#include "catbreed/wigner_model.hpp"

namespace catbreed {

struct SampleRecord {
  double x0 = 0.0;
  double x1 = 0.0;
  double theta = 0.0;  // nominal relative phase, radians
  bool accepted = false;
};

enum class JitterKind { Uniform, Gaussian };

struct SampleSet {
  std::vector<SampleRecord> records;
  Units units = Units::Internal;
  uint64_t seed = 0;
  SinglePhotonModel model;
  double jitter_deg = 0.0;          // 0 disables jitter
  JitterKind jitter_kind = JitterKind::Uniform;

  std::vector<std::pair<double, size_t>> per_phase_counts() const;
  void append(const SampleSet& other);
};

// i.i.d. draws from the closed-form joint density at nominal phase theta,
// rejection sampling under a Gaussian envelope with an analytic bound on the
// polynomial bracket. Deterministic per (seed, params), split over fixed
// worker chunks so the byte stream is independent of thread count.
SampleSet sample_joint(const SinglePhotonModel& m, double theta, int n,
                       uint64_t seed, double phase_jitter_deg = 0.0,
                       JitterKind jitter = JitterKind::Uniform,
                       ExecPolicy exec = ExecPolicy::Parallel);

// Single photon on one port, vacuum on the other, both arms measured at the
// same local-oscillator phase; used by the quick-delta diagnostic.
SampleSet sample_photon_plus_vacuum(const SinglePhotonModel& m, int n,
                                    uint64_t seed,
                                    ExecPolicy exec = ExecPolicy::Parallel);

struct ConditionResult {
  SampleSet accepted;
  double fraction = 0.0;
  double std_error = 0.0;  // binomial
  bool empty = false;
};

ConditionResult condition(const SampleSet& s, double window, Units units);

struct Histogram2D {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  Eigen::MatrixXd counts;  // counts(i, j): x0 bin i, x1 bin j
  long total = 0;
  long overflow = 0;
};

Histogram2D histogram2d(const SampleSet& s, int bins, double lo, double hi);

struct SigmaDeltaFit {
  double sigma = 1.0;
  double delta = 0.0;
  double log_likelihood = 0.0;
  double sigma_err = 0.0;
  double delta_err = 0.0;
  bool converged = false;
  bool on_boundary = false;
};

// Maximum-likelihood fit of the closed-form joint density over
// sigma in [1, 1.5], delta in [0, 2]; coarse grid then local refinement,
// errors from the observed information matrix.
SigmaDeltaFit fit_sigma_delta(const SampleSet& s,
                              ExecPolicy exec = ExecPolicy::Parallel);

struct DeltaEstimate {
  double delta = 0.0;
  double sigma = 1.0;
  bool in_model = true;  // false if moments are inconsistent with delta in [0,2]
};

// Quick diagnostic: undo the beamsplitter with x' = (x0 - x1)/sqrt(2) and
// invert the second/fourth moments of the recovered single-mode marginal.
DeltaEstimate estimate_delta_quick(const SampleSet& s);

// Homodyne detection efficiency applied to the recorded tomography
// quadrature: x1 -> sqrt(eta) x1 + sqrt(1-eta) * vacuum noise. x0 is left
// alone (conditioning already happened). Deterministic per seed.
SampleSet degrade_efficiency(const SampleSet& s, double eta, uint64_t seed);

}  // namespace catbreed
