// Timing comparison of the OpenMP kernels against their serial reference
// implementations. The parallel paths are exercised by the test suite for
// bitwise agreement; this tool reports the speedups.

#include <chrono>
#include <cstdio>

#include "catbreed/sampler.hpp"
#include "catbreed/tomography.hpp"
#include "catbreed/wigner_model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace catbreed;

namespace {

template <typename F>
double time_ms(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-32s %10.1f ms %10.1f ms %8.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n");
#endif
  std::printf("%-32s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  SinglePhotonModel m{1.02, 1.17};
  GaussPoly w = imperfect_photon_wigner(m);
  GaussPoly bred = breed_wigner(w, w, 0.2, Units::Homodyne);

  {
    GridSpec spec;  // default 601x601
    double ser = time_ms([&] { wigner_grid_of(bred, spec, ExecPolicy::Serial); });
    double par = time_ms([&] { wigner_grid_of(bred, spec, ExecPolicy::Parallel); });
    report("phase-space grid (601x601)", ser, par);
  }
  {
    FockVector cat = make_squeezed_cat({1.63, 1.52, Parity::Even}, 20);
    DensityMatrix rho = apply_loss(pure_density(cat), 0.77);
    GridSpec spec;
    spec.nx = spec.np = 301;
    double ser = time_ms([&] { wigner_of_state(rho, spec, ExecPolicy::Serial); });
    double par = time_ms([&] { wigner_of_state(rho, spec, ExecPolicy::Parallel); });
    report("Fock-state grid (301x301)", ser, par);
  }
  {
    double ser = time_ms([&] { negativity(bred, ExecPolicy::Serial); });
    double par = time_ms([&] { negativity(bred, ExecPolicy::Parallel); });
    report("negativity scan", ser, par);
  }
  {
    double ser = time_ms([&] {
      sample_joint(m, kPi, 100000, 5, 0.0, JitterKind::Uniform,
                   ExecPolicy::Serial);
    });
    double par = time_ms([&] {
      sample_joint(m, kPi, 100000, 5, 0.0, JitterKind::Uniform,
                   ExecPolicy::Parallel);
    });
    report("rejection sampling (100k)", ser, par);
  }
  SampleSet s = sample_joint(m, kPi, 20000, 5);
  {
    double ser = time_ms([&] { fit_sigma_delta(s, ExecPolicy::Serial); });
    double par = time_ms([&] { fit_sigma_delta(s, ExecPolicy::Parallel); });
    report("likelihood fit (20k samples)", ser, par);
  }
  {
    TomographyConfig cfg;
    cfg.cutoff = 12;
    cfg.eta_det = 1.0;
    cfg.tol = 1e-6;  // timing run, no need for a tight fixed point
    PovmSet povm = build_homodyne_povm(cfg);
    ConditionResult c = condition(s, 0.2, Units::Homodyne);
    TomographyResult fit = mle_reconstruct(c.accepted, povm);
    std::vector<long> totals(4, 500);
    SqueezedCatSpec target{1.63, 1.52, Parity::Even};
    double ser = time_ms([&] {
      mc_error_bars(fit, povm, totals, target, 10, 3, ExecPolicy::Serial);
    });
    double par = time_ms([&] {
      mc_error_bars(fit, povm, totals, target, 10, 3, ExecPolicy::Parallel);
    });
    report("bootstrap replicas (10)", ser, par);
  }
  return 0;
}
