#pragma once

#include <string>
#include <vector>

#include "catbreed/io.hpp"
#include "catbreed/sampler.hpp"
#include "catbreed/tomography.hpp"
#include "catbreed/wigner_model.hpp"

namespace catbreed {

// One configuration drives the whole run; it is echoed into every output so
// a run can be reproduced from any file it wrote.
struct RunConfig {
  Units units = Units::Homodyne;
  SinglePhotonModel model{1.02, 1.17};
  double window = 0.2;  // conditioning half-width, in `units`
  int samples_per_phase = 15000;
  uint64_t seed = 1;
  double jitter_deg = 0.0;
  JitterKind jitter_kind = JitterKind::Uniform;
  SqueezedCatSpec target{1.63, 1.52, Parity::Even};
  TomographyConfig tomo;
  int replicas = 50;
  std::string out_dir;  // empty disables file output

  Metadata to_metadata() const;
  static RunConfig from_metadata(const Metadata& m);
};

struct PipelineReport {
  RunConfig config;

  // analytic stage
  double acceptance_homodyne_reading = 0.0;
  double acceptance_internal_reading = 0.0;
  double ideal_cat_fidelity = 0.0;      // narrow-window ideal breeding vs target
  double route_agreement = 0.0;         // phase-space vs Fock breeding
  double model_negativity = 0.0;        // bred model state, no correction
  double model_cat_fidelity = 0.0;

  // sampled stage
  std::vector<long> per_phase_raw;
  std::vector<long> per_phase_conditioned;
  double mc_fraction = 0.0;
  double mc_fraction_se = 0.0;
  SigmaDeltaFit fit;
  DeltaEstimate quick_delta;

  // tomography stage
  TomographyResult tomo;
  StateSummary corrected;
  StateSummary uncorrected;
  ReplicaStats error_bars;
  CatFit reconstructed_cat;
};

// model -> breed (both routes) -> sample -> condition -> fit -> tomography
// -> summaries -> best-fit cat. Writes per-stage files into out_dir when set;
// a stage failure is rethrown with the stage name after earlier outputs have
// been persisted.
PipelineReport run_pipeline(const RunConfig& cfg);

// Human-readable table juxtaposing computed values with the published
// reference numbers; all sampled comparisons are model-based consistency
// bands, not reproductions of lab data.
std::string render_report(const PipelineReport& r);
// Machine-readable version of the same content.
std::string report_json(const PipelineReport& r);

struct GenerationRow {
  int generation = 0;
  CatFit fit;
  double negativity = 0.0;
  double acceptance = 0.0;  // hard-window mass at this round's conditioning
  int degree = 0;
};

// Repeated breeding, each generation's output fed into the next round
// through the phase-space route. Stops early (with the rows so far) if the
// polynomial degree or Fock cutoff would be exceeded.
std::vector<GenerationRow> iterate_breeding(const SinglePhotonModel& input,
                                            int generations, double window,
                                            Units units, int cutoff = 24);

std::string render_growth_table(const std::vector<GenerationRow>& rows);

}  // namespace catbreed
