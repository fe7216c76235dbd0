// End-to-end acceptance gate: one pass/fail line per criterion.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "catbreed/pipeline.hpp"
#include "catbreed/quadrature.hpp"
#include "catbreed/rng.hpp"

using namespace catbreed;

namespace {

int failures = 0;

void report(int idx, const char* what, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s - %s (%s)\n", idx, pass ? "PASS" : "FAIL",
              what, detail.c_str());
  if (!pass) ++failures;
}

template <typename F>
void criterion(int idx, const char* what, F&& f) {
  try {
    auto [pass, detail] = f();
    report(idx, what, pass, detail);
  } catch (const std::exception& e) {
    report(idx, what, false, std::string("exception: ") + e.what());
  }
}

std::string num(double v, int prec = 5) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

DensityMatrix sanitize(DensityMatrix a) {
  a = 0.5 * (a + DensityMatrix(a.adjoint()));
  a /= a.trace().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  a = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return a / a.trace().real();
}

}  // namespace

int main() {
  const SinglePhotonModel kIdeal{1.0, 2.0};
  const SinglePhotonModel kPaper{1.02, 1.17};
  const SqueezedCatSpec kTarget{1.63, 1.52, Parity::Even};

  criterion(1, "narrow-window bred state amplitudes 1/sqrt(3), sqrt(2/3)", [&] {
    FockVector one = FockVector::fock(1, 16);
    BreedResult r = breed_fock(one, one, 1e-6, Units::Internal);
    double e00 = std::abs(r.rho(0, 0).real() - 1.0 / 3.0);
    double e22 = std::abs(r.rho(2, 2).real() - 2.0 / 3.0);
    double e02 = std::abs(r.rho(0, 2).real() - std::sqrt(2.0) / 3.0);
    double worst = std::max({e00, e22, e02});
    return std::pair{worst < 1e-10, "max deviation " + num(worst, 3)};
  });

  criterion(2, "0.99 cat fidelity and 0.61 / 0.79 coefficients", [&] {
    FockVector one = FockVector::fock(1, 16);
    BreedResult r = breed_fock(one, one, 1e-6, Units::Internal);
    FockVector cat = make_squeezed_cat(kTarget, 16);
    double f = fidelity(cat, r.rho);
    double c0 = std::abs(cat.amps(0));
    double c2 = std::abs(cat.amps(2));
    bool pass = f >= 0.985 && std::abs(c0 - 0.61) <= 0.01 &&
                std::abs(c2 - 0.79) <= 0.01;
    return std::pair{pass, "fidelity " + num(f) + ", c0 " + num(c0, 3) +
                               ", c2 " + num(c2, 3)};
  });

  criterion(3, "closed-form joint density vs quadrature oracle", [&] {
    double worst = 0.0, worst_sym = 0.0;
    for (const auto& m : {kIdeal, kPaper}) {
      GaussPoly w = imperfect_photon_wigner(m);
      for (double deg : {90.0, 120.0, 150.0, 180.0}) {
        double th = deg * kPi / 180.0;
        for (int i = 0; i < 21; ++i)
          for (int j = 0; j < 21; ++j) {
            double x0 = -3.0 + 0.3 * i, x1 = -3.0 + 0.3 * j;
            double c = joint_prob_closed(x0, x1, th, m);
            worst = std::max(worst,
                             std::abs(c - joint_prob_numeric(x0, x1, th, w)));
            worst_sym = std::max(
                worst_sym, std::abs(c - joint_prob_closed(x0, x1, kPi - th, m)));
          }
      }
    }
    double integral = 0.0;
    QuadRule q = gauss_legendre(160, -10.0, 10.0);
    for (size_t i = 0; i < q.nodes.size(); ++i)
      for (size_t j = 0; j < q.nodes.size(); ++j)
        integral += q.weights[i] * q.weights[j] *
                    joint_prob_closed(q.nodes[i], q.nodes[j], 2 * kPi / 3,
                                      kPaper);
    bool pass = worst <= 1e-6 && std::abs(integral - 1.0) <= 1e-6 &&
                worst_sym <= 1e-12;
    return std::pair{pass, "max |closed - quadrature| " + num(worst, 3) +
                               ", integral " + num(integral, 10)};
  });

  criterion(4, "ideal limit: single-photon Wigner dip and two-photon zero", [&] {
    double w00 = imperfect_photon_wigner(kIdeal).evaluate(0.0, 0.0);
    double hom = joint_prob_closed(1.0, 1.0, kPi, kIdeal);
    bool pass = std::abs(w00 + 1.0 / kPi) <= 1e-12 && std::abs(hom) <= 1e-12;
    return std::pair{pass, "W(0,0) " + num(w00, 12) + ", P(1,1,180deg) " +
                               num(hom, 3)};
  });

  criterion(5, "phase-space and Fock breeding routes agree", [&] {
    GaussPoly photon = imperfect_photon_wigner(kIdeal);
    FockVector one = FockVector::fock(1, 16);
    double worst = 1.0;
    for (double window : {0.05, 0.1, 0.2, 0.3}) {
      GaussPoly wb = breed_wigner(photon, photon, window, Units::Internal);
      BreedResult fr =
          breed_fock(one, one, window, Units::Internal, WindowKind::Gaussian);
      double f = fidelity(sanitize(density_matrix_from_wigner(wb, 16)), fr.rho);
      worst = std::min(worst, f);
    }
    return std::pair{worst >= 0.999, "min fidelity " + num(worst, 6)};
  });

  criterion(6, "selection fraction near 15 percent, analytic and sampled", [&] {
    GaussPoly w = imperfect_photon_wigner(kPaper);
    double f_hom = analytic_acceptance(w, w, 0.2 / std::sqrt(2.0));
    double f_int = analytic_acceptance(w, w, 0.2);
    bool band = (f_hom >= 0.10 && f_hom <= 0.20) ||
                (f_int >= 0.10 && f_int <= 0.20);
    SampleSet s = sample_joint(kPaper, kPi, 100000, 61);
    ConditionResult ch = condition(s, 0.2, Units::Homodyne);
    ConditionResult ci = condition(s, 0.2, Units::Internal);
    bool mc = std::abs(ch.fraction - f_hom) <= 3.0 * ch.std_error &&
              std::abs(ci.fraction - f_int) <= 3.0 * ci.std_error;
    return std::pair{band && mc,
                     "readings " + num(f_hom, 4) + " / " + num(f_int, 4) +
                         ", sampled " + num(ch.fraction, 4) + " / " +
                         num(ci.fraction, 4)};
  });

  criterion(7, "tomography self-consistency at paper-scale counts", [&] {
    GaussPoly photon = imperfect_photon_wigner(kPaper);
    GaussPoly bred = breed_wigner(photon, photon, 0.2, Units::Homodyne);
    TomographyConfig cfg;  // eta_det 0.77, cutoff 20
    DensityMatrix truth = sanitize(density_matrix_from_wigner(bred, cfg.cutoff));

    SampleSet data;
    uint64_t seed = 700;
    for (double deg : cfg.phases_deg) {
      SampleSet s = sample_joint(kPaper, deg * kPi / 180.0, 20000, seed++);
      ConditionResult c = condition(s, 0.2, Units::Homodyne);
      if (c.accepted.records.size() > 2000) c.accepted.records.resize(2000);
      data.append(c.accepted);
    }
    data = degrade_efficiency(data, cfg.eta_det, 710);

    PovmSet povm = build_homodyne_povm(cfg);
    TomographyResult res = mle_reconstruct(data, povm);
    bool monotone = true;
    for (size_t i = 1; i < res.likelihood_trace.size(); ++i)
      if (res.likelihood_trace[i] < res.likelihood_trace[i - 1])
        monotone = false;
    double f = fidelity(res.rho, truth);
    return std::pair{f >= 0.95 && monotone,
                     "fidelity with generating state " + num(f, 4) +
                         ", likelihood " +
                         (monotone ? "nondecreasing" : "DECREASED")};
  });

  // criteria 8 and parts of 10/11 share the full paper-scale pipeline
  criterion(8, "model-based consistency bands for the published numbers", [&] {
    RunConfig cfg;  // paper defaults: (1.02, 1.17), window 0.2 homodyne
    cfg.samples_per_phase = 15000;
    cfg.replicas = 50;
    cfg.seed = 42;
    PipelineReport rep = run_pipeline(cfg);
    double fc = rep.corrected.fidelity;
    double nc = rep.corrected.negativity;
    double nu = rep.uncorrected.negativity;
    double sd = rep.error_bars.negativity_std;
    bool pass = fc >= 0.55 && fc <= 0.80 && nc < 0.0 && nu < 0.0 &&
                std::abs(nu) < std::abs(nc) && sd >= 0.003 && sd <= 0.03;
    return std::pair{
        pass, "model-based: fidelity " + num(fc, 3) + " (ref 0.61), corrected " +
                  num(nc, 3) + " (ref -0.08), uncorrected " + num(nu, 3) +
                  " (ref -0.024), std " + num(sd, 2) + " (ref 0.01)"};
  });

  criterion(9, "parameter recovery from 4 x 15000 samples", [&] {
    SampleSet all;
    uint64_t seed = 900;
    for (double deg : {90.0, 120.0, 150.0, 180.0})
      all.append(sample_joint(kPaper, deg * kPi / 180.0, 15000, seed++));
    SigmaDeltaFit fit = fit_sigma_delta(all);
    double zs = std::abs(fit.sigma - kPaper.sigma) / fit.sigma_err;
    double zd = std::abs(fit.delta - kPaper.delta) / fit.delta_err;
    SampleSet pv = sample_photon_plus_vacuum(kPaper, 40000, 910);
    DeltaEstimate quick = estimate_delta_quick(pv);
    bool pass = fit.converged && zs <= 2.0 && zd <= 2.0 &&
                std::abs(quick.delta - kPaper.delta) <= 0.1;
    return std::pair{pass, "sigma " + num(fit.sigma, 4) + " (" + num(zs, 2) +
                               " se), delta " + num(fit.delta, 4) + " (" +
                               num(zd, 2) + " se), quick-delta " +
                               num(quick.delta, 3)};
  });

  criterion(10, "second-generation breeding grows the cat", [&] {
    std::vector<GenerationRow> rows =
        iterate_breeding(kIdeal, 2, 0.2, Units::Homodyne, 28);
    if (rows.size() < 2)
      return std::pair{false, std::string("stopped before generation 2")};
    bool pass = std::abs(rows[0].fit.alpha - 1.63) < 0.05 &&
                rows[1].fit.alpha > rows[0].fit.alpha &&
                rows[1].fit.fidelity >= 0.95;
    return std::pair{pass, "alpha " + num(rows[0].fit.alpha, 4) + " -> " +
                               num(rows[1].fit.alpha, 4) + ", gen-2 fit " +
                               num(rows[1].fit.fidelity, 4)};
  });

  criterion(11, "byte-identical outputs across worker counts", [&] {
    namespace fs = std::filesystem;
    std::string cli = CATBREED_CLI_PATH;
    std::string dir = "/tmp/catbreed_acceptance_run";
    std::string ref = dir + "_ref";
    fs::remove_all(dir);
    fs::remove_all(ref);
    std::string args = " pipeline --samples-per-phase 3000 --replicas 10"
                       " --seed 7 --max-iters 300 --out-dir " +
                       dir + " > /dev/null";
    if (std::system(("OMP_NUM_THREADS=1 " + cli + args).c_str()) != 0)
      return std::pair{false, std::string("first run failed")};
    fs::rename(dir, ref);
    if (std::system(("OMP_NUM_THREADS=5 " + cli + args).c_str()) != 0)
      return std::pair{false, std::string("second run failed")};

    int compared = 0;
    for (const auto& entry : fs::directory_iterator(ref)) {
      std::string name = entry.path().filename().string();
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(fs::path(dir) / name, std::ios::binary);
      if (!b) return std::pair{false, "missing in rerun: " + name};
      std::string ca((std::istreambuf_iterator<char>(a)), {});
      std::string cb((std::istreambuf_iterator<char>(b)), {});
      if (ca != cb) return std::pair{false, "differs: " + name};
      ++compared;
    }
    return std::pair{compared > 5, std::to_string(compared) +
                                       " files byte-identical at 1 vs 5 threads"};
  });

  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
