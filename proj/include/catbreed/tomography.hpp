#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "catbreed/common.hpp"
#include "catbreed/fock.hpp"
#include "catbreed/sampler.hpp"

namespace catbreed {

struct TomographyConfig {
  double eta_det = 0.77;  // homodyne detection efficiency, folded into the POVM
  int cutoff = 20;        // Fock truncation, dimension cutoff + 1
  double bin_width = 0.1; // internal units
  double x_max = 5.0;     // interior bins span [-x_max, x_max]
  std::vector<double> phases_deg = {90.0, 120.0, 150.0, 180.0};
  int max_iters = 2000;
  double tol = 1e-9;      // stop when the log-likelihood gain drops below this
};

// Binned homodyne measurement operators on the truncated Fock space,
// scaled by 1/num_phases so the whole set sums to identity. Per phase the
// layout is [lower overflow, interior bins ascending, upper overflow].
struct PovmSet {
  std::vector<Eigen::MatrixXcd> ops;
  std::vector<int> phase_index;  // into cfg.phases_deg, one entry per op
  int per_phase = 0;
  TomographyConfig cfg;
};

PovmSet build_homodyne_povm(const TomographyConfig& cfg);

struct BinnedCounts {
  std::vector<long> counts;          // aligned with PovmSet::ops
  std::vector<long> per_phase_total;
  long total = 0;
};

// Assigns each record's (x1, theta) to a POVM bin. Record phases must match
// the configured phase list to within 1e-6 rad.
BinnedCounts bin_counts(const SampleSet& s, const PovmSet& povm);

struct TomographyResult {
  DensityMatrix rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool used_dilution = false;
  bool probability_floored = false;
  std::vector<double> likelihood_trace;
};

TomographyResult mle_from_counts(const BinnedCounts& data, const PovmSet& povm);
TomographyResult mle_reconstruct(const SampleSet& s, const PovmSet& povm);

struct ReplicaStats {
  double negativity_mean = 0.0;
  double negativity_std = 0.0;
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  int replicas_used = 0;
  int replicas_excluded = 0;  // non-converged refits
  // set when fewer than two refits converged and the capped fits were used
  bool included_nonconverged = false;
};

// Parametric bootstrap: resample per-phase datasets of the original sizes
// from the reconstruction's predicted bin probabilities, refit each, and
// report spread of the Wigner minimum and of the fidelity with the target
// cat. Deterministic per seed; replicas merged in index order.
ReplicaStats mc_error_bars(const TomographyResult& fit, const PovmSet& povm,
                           const std::vector<long>& per_phase_total,
                           const SqueezedCatSpec& target, int replicas,
                           uint64_t seed,
                           ExecPolicy exec = ExecPolicy::Parallel);

enum class Correction { None, Efficiency };

struct StateSummary {
  double negativity = 0.0;
  double fidelity = 0.0;
  Correction correction = Correction::Efficiency;
};

// When the POVM folded the detection loss the reconstruction is already the
// corrected state; Correction::None degrades it through the loss map at
// eta_det before evaluating, giving the as-detected numbers.
StateSummary negativity_and_fidelity_report(const DensityMatrix& rho,
                                            const SqueezedCatSpec& target,
                                            Correction correction,
                                            double eta_det);

}  // namespace catbreed
