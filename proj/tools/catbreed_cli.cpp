#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "catbreed/io.hpp"
#include "catbreed/pipeline.hpp"

using namespace catbreed;

namespace {

constexpr int kExitDomain = 2;
constexpr int kExitAccuracy = 3;
constexpr int kExitIo = 4;

std::string default_out_dir() {
  const char* env = std::getenv("CATBREED_OUT_DIR");
  return env ? env : ".";
}

std::string in_dir(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

Units units_of(const std::string& s) { return parse_units(s); }

struct CommonModel {
  double sigma = 1.02;
  double delta = 1.17;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--sigma", sigma, "photon model width");
    cmd->add_option("--delta", delta, "photon model quality, in [0,2]");
  }
  SinglePhotonModel model() const { return {sigma, delta}; }
};

int cmd_photon_model(double g, double h, double eta, double xi) {
  SinglePhotonModel m = imperfect_photon_params({g, h, eta, xi});
  std::cout << "sigma^2 = " << format_double(m.sigma * m.sigma) << "\n"
            << "sigma   = " << format_double(m.sigma) << "\n"
            << "delta   = " << format_double(m.delta) << "\n"
            << (m.delta > 1.0 ? "Wigner function negative at the origin\n"
                              : "Wigner function nonnegative at the origin\n");
  return 0;
}

int cmd_joint_grid(const CommonModel& cm, std::vector<double> phases_deg,
                   int n, double range, const std::string& dir) {
  SinglePhotonModel m = cm.model();
  std::filesystem::create_directories(dir);
  for (double deg : phases_deg) {
    double theta = deg * kPi / 180.0;
    WignerGrid g;
    g.spec = {-range, range, -range, range, n, n};
    g.values.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g.values(i, j) = joint_prob_closed(g.spec.x(i), g.spec.p(j), theta, m);
    std::string path =
        in_dir(dir, "joint_theta" + std::to_string(int(deg)) + ".txt");
    write_wigner_grid(path, g,
                      {{"kind", "joint-density"},
                       {"theta_deg", format_double(deg)},
                       {"sigma", format_double(m.sigma)},
                       {"delta", format_double(m.delta)},
                       {"axes", "x0 x1"}});
    std::cout << path << "  integral " << format_double(g.integral()) << "\n";
  }
  return 0;
}

int cmd_sample(const CommonModel& cm, double theta_deg, int n, uint64_t seed,
               double jitter_deg, const std::string& jitter_kind,
               const std::string& out) {
  SampleSet s = sample_joint(cm.model(), theta_deg * kPi / 180.0, n, seed,
                             jitter_deg,
                             jitter_kind == "gaussian" ? JitterKind::Gaussian
                                                       : JitterKind::Uniform);
  write_samples(out, s);
  std::cout << "wrote " << s.records.size() << " samples to " << out << "\n";
  return 0;
}

int cmd_condition(const std::string& in, double window,
                  const std::string& units, const std::string& out) {
  SampleSet s = read_samples(in);
  ConditionResult c = condition(s, window, units_of(units));
  std::cout << "kept " << c.accepted.records.size() << " of "
            << s.records.size() << ", fraction "
            << format_double(c.fraction) << " +- "
            << format_double(c.std_error) << "\n";
  if (!out.empty()) write_samples(out, c.accepted);
  return 0;
}

int cmd_fit(const std::vector<std::string>& ins, bool quick) {
  SampleSet all;
  for (const auto& path : ins) {
    SampleSet s = read_samples(path);
    if (all.records.empty()) all = s;
    else all.append(s);
  }
  if (quick) {
    DeltaEstimate e = estimate_delta_quick(all);
    std::cout << "quick-delta: sigma " << format_double(e.sigma) << ", delta "
              << format_double(e.delta)
              << (e.in_model ? "" : "  (outside the model family)") << "\n";
    return 0;
  }
  SigmaDeltaFit f = fit_sigma_delta(all);
  std::cout << "sigma " << format_double(f.sigma) << " +- "
            << format_double(f.sigma_err) << "\n"
            << "delta " << format_double(f.delta) << " +- "
            << format_double(f.delta_err) << "\n"
            << "log-likelihood " << format_double(f.log_likelihood) << "\n";
  if (f.on_boundary) std::cout << "fit landed on a parameter boundary\n";
  return 0;
}

int cmd_breed(const CommonModel& cm, double window, const std::string& units,
              int cutoff, const std::string& dir) {
  GaussPoly photon = imperfect_photon_wigner(cm.model());
  GaussPoly bred = breed_wigner(photon, photon, window, units_of(units));
  DensityMatrix rho = density_matrix_from_wigner(bred, cutoff);
  rho = 0.5 * (rho + DensityMatrix(rho.adjoint()));
  rho /= rho.trace().real();
  std::filesystem::create_directories(dir);
  write_state(in_dir(dir, "bred_state.txt"), rho,
              {{"sigma", format_double(cm.sigma)},
               {"delta", format_double(cm.delta)},
               {"window", format_double(window)},
               {"units", units}});
  GridSpec spec;
  spec.xmin = spec.pmin = -4.0;
  spec.xmax = spec.pmax = 4.0;
  spec.nx = spec.np = 201;
  write_wigner_grid(in_dir(dir, "bred_wigner.txt"), wigner_grid_of(bred, spec));
  double neg = negativity(bred);
  CatFit fit = best_fit_cat(rho, 0.5, 3.0, 1.0, 2.2);
  std::cout << "negativity " << format_double(neg) << "\n"
            << "best-fit cat: alpha " << format_double(fit.alpha) << ", s "
            << format_double(fit.s) << ", fidelity "
            << format_double(fit.fidelity) << "\n";
  return 0;
}

int cmd_tomo(const std::string& in, TomographyConfig cfg, int replicas,
             double target_alpha, double target_s, const std::string& out) {
  SampleSet s = read_samples(in);
  PovmSet povm = build_homodyne_povm(cfg);
  TomographyResult res = mle_reconstruct(s, povm);
  SqueezedCatSpec target{target_alpha, target_s, Parity::Even};
  StateSummary corr = negativity_and_fidelity_report(
      res.rho, target, Correction::Efficiency, cfg.eta_det);
  StateSummary raw = negativity_and_fidelity_report(res.rho, target,
                                                    Correction::None,
                                                    cfg.eta_det);
  std::cout << "iterations " << res.iterations
            << (res.converged ? " (converged)" : " (iteration cap)")
            << ", log-likelihood " << format_double(res.log_likelihood) << "\n"
            << "corrected:   negativity " << format_double(corr.negativity)
            << ", cat fidelity " << format_double(corr.fidelity) << "\n"
            << "uncorrected: negativity " << format_double(raw.negativity)
            << ", cat fidelity " << format_double(raw.fidelity) << "\n";
  ReplicaStats stats;
  bool have_stats = false;
  if (replicas > 0) {
    BinnedCounts data = bin_counts(s, povm);
    stats = mc_error_bars(res, povm, data.per_phase_total, target, replicas,
                          s.seed + 1);
    have_stats = true;
    std::cout << "bootstrap (" << stats.replicas_used << " replicas): negativity "
              << format_double(stats.negativity_mean) << " +- "
              << format_double(stats.negativity_std) << ", fidelity "
              << format_double(stats.fidelity_mean) << " +- "
              << format_double(stats.fidelity_std) << "\n";
  }
  if (!out.empty())
    write_tomography_result(out, res, cfg, have_stats ? &stats : nullptr);
  return 0;
}

int cmd_iterate(const CommonModel& cm, int generations, double window,
                const std::string& units, int cutoff) {
  std::vector<GenerationRow> rows =
      iterate_breeding(cm.model(), generations, window, units_of(units), cutoff);
  std::cout << render_growth_table(rows);
  if (static_cast<int>(rows.size()) < generations)
    std::cout << "stopped after generation " << rows.size()
              << ": next round would exceed the degree or cutoff limits\n";
  return 0;
}

int cmd_pipeline(RunConfig cfg) {
  PipelineReport rep = run_pipeline(cfg);
  std::cout << render_report(rep);
  if (!cfg.out_dir.empty())
    std::cout << "\noutputs written to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& dir, double target_alpha, double target_s) {
  Metadata cfg_meta = read_key_value(in_dir(dir, "config.txt"));
  RunConfig cfg = RunConfig::from_metadata(cfg_meta);
  DensityMatrix rho = read_state(in_dir(dir, "reconstructed_state.txt"));
  SqueezedCatSpec target{target_alpha, target_s, Parity::Even};
  StateSummary corr = negativity_and_fidelity_report(
      rho, target, Correction::Efficiency, cfg.tomo.eta_det);
  StateSummary raw = negativity_and_fidelity_report(rho, target,
                                                    Correction::None,
                                                    cfg.tomo.eta_det);
  CatFit fit = best_fit_cat(rho, 0.5, 3.0, 1.0, 2.2);
  std::cout << "reconstructed state from " << dir << "\n"
            << "corrected:   negativity " << format_double(corr.negativity)
            << ", cat fidelity " << format_double(corr.fidelity) << "\n"
            << "uncorrected: negativity " << format_double(raw.negativity)
            << ", cat fidelity " << format_double(raw.fidelity) << "\n"
            << "best-fit cat: alpha " << format_double(fit.alpha) << ", s "
            << format_double(fit.s) << ", fidelity "
            << format_double(fit.fidelity) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homodyne-heralded cat-state breeding toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; section per subcommand");

  // photon-model
  double g = 1.03, h = 1.0, eta = 1.0, xi = 1.0;
  auto* pm = app.add_subcommand("photon-model",
                                "single-photon model from source gains");
  pm->add_option("--g", g, "parametric gain");
  pm->add_option("--h-gain", h, "excess-noise gain");
  pm->add_option("--eta", eta, "path transmission");
  pm->add_option("--xi", xi, "modal purity");

  // joint-grid
  CommonModel jg_model;
  std::vector<double> jg_phases = {90, 120, 150, 180};
  int jg_n = 201;
  double jg_range = 5.0;
  std::string jg_dir = default_out_dir();
  auto* jg = app.add_subcommand("joint-grid",
                                "two-arm joint density grids per phase");
  jg_model.add_flags(jg);
  jg->add_option("--phases-deg", jg_phases, "relative phases in degrees");
  jg->add_option("--n", jg_n, "grid points per axis");
  jg->add_option("--range", jg_range, "half-width of the grid, internal units");
  jg->add_option("--out-dir", jg_dir, "output directory");

  // sample
  CommonModel sm_model;
  double sm_theta = 180.0, sm_jitter = 0.0;
  int sm_n = 15000;
  uint64_t sm_seed = 1;
  std::string sm_jkind = "uniform", sm_out = "samples.txt";
  auto* sm = app.add_subcommand("sample", "draw joint homodyne samples");
  sm_model.add_flags(sm);
  sm->add_option("--theta-deg", sm_theta, "relative phase in degrees");
  sm->add_option("--n", sm_n, "number of samples");
  sm->add_option("--seed", sm_seed, "random seed");
  sm->add_option("--jitter-deg", sm_jitter, "phase jitter half-width");
  sm->add_option("--jitter-kind", sm_jkind, "uniform|gaussian")
      ->check(CLI::IsMember({"uniform", "gaussian"}));
  sm->add_option("--out", sm_out, "output sample file");

  // condition
  std::string cd_in, cd_out, cd_units = "homodyne";
  double cd_window = 0.2;
  auto* cnd = app.add_subcommand("condition", "post-select on |x0| <= window");
  cnd->add_option("--in", cd_in, "input sample file")->required();
  cnd->add_option("--window", cd_window, "conditioning half-width");
  cnd->add_option("--units", cd_units, "homodyne|internal")
      ->check(CLI::IsMember({"homodyne", "internal"}));
  cnd->add_option("--out", cd_out, "accepted-sample output file");

  // fit
  std::vector<std::string> ft_ins;
  bool ft_quick = false;
  auto* ft = app.add_subcommand("fit", "fit the photon model to samples");
  ft->add_option("--in", ft_ins, "input sample files")->required();
  ft->add_flag("--quick", ft_quick, "moment-based quick estimate");

  // breed
  CommonModel br_model;
  double br_window = 0.2;
  int br_cutoff = 20;
  std::string br_units = "homodyne", br_dir = default_out_dir();
  auto* br = app.add_subcommand("breed", "analytic breeding of two photons");
  br_model.add_flags(br);
  br->add_option("--window", br_window, "conditioning width");
  br->add_option("--units", br_units, "homodyne|internal")
      ->check(CLI::IsMember({"homodyne", "internal"}));
  br->add_option("--cutoff", br_cutoff, "Fock cutoff of the exported state");
  br->add_option("--out-dir", br_dir, "output directory");

  // tomo
  std::string tm_in, tm_out;
  TomographyConfig tm_cfg;
  int tm_replicas = 0;
  double tm_alpha = 1.63, tm_s = 1.52;
  auto* tm = app.add_subcommand("tomo", "reconstruct a state from samples");
  tm->add_option("--in", tm_in, "conditioned sample file")->required();
  tm->add_option("--eta-det", tm_cfg.eta_det, "detection efficiency");
  tm->add_option("--cutoff", tm_cfg.cutoff, "Fock cutoff");
  tm->add_option("--bin-width", tm_cfg.bin_width, "bin width, internal units");
  tm->add_option("--x-max", tm_cfg.x_max, "interior bin range");
  tm->add_option("--phases-deg", tm_cfg.phases_deg, "phase list in degrees");
  tm->add_option("--max-iters", tm_cfg.max_iters, "iteration cap");
  tm->add_option("--tol", tm_cfg.tol, "log-likelihood tolerance");
  tm->add_option("--replicas", tm_replicas, "bootstrap replicas (0 = skip)");
  tm->add_option("--target-alpha", tm_alpha, "target cat amplitude");
  tm->add_option("--target-s", tm_s, "target cat squeeze");
  tm->add_option("--out", tm_out, "result document path");

  // iterate
  CommonModel it_model;
  it_model.sigma = 1.0;
  it_model.delta = 2.0;
  int it_gens = 2, it_cutoff = 28;
  double it_window = 0.2;
  std::string it_units = "homodyne";
  auto* it = app.add_subcommand("iterate", "repeated breeding rounds");
  it_model.add_flags(it);
  it->add_option("--generations", it_gens, "number of rounds");
  it->add_option("--window", it_window, "conditioning width");
  it->add_option("--units", it_units, "homodyne|internal")
      ->check(CLI::IsMember({"homodyne", "internal"}));
  it->add_option("--cutoff", it_cutoff, "Fock cutoff for the growth fits");

  // pipeline
  RunConfig pl_cfg;
  pl_cfg.out_dir = default_out_dir();
  std::string pl_units = "homodyne", pl_jkind = "uniform", pl_parity = "even";
  auto* pl = app.add_subcommand("pipeline", "full end-to-end run with report");
  pl->add_option("--sigma", pl_cfg.model.sigma, "photon model width");
  pl->add_option("--delta", pl_cfg.model.delta, "photon model quality");
  pl->add_option("--window", pl_cfg.window, "conditioning width");
  pl->add_option("--units", pl_units, "homodyne|internal")
      ->check(CLI::IsMember({"homodyne", "internal"}));
  pl->add_option("--samples-per-phase", pl_cfg.samples_per_phase,
                 "raw samples per phase");
  pl->add_option("--seed", pl_cfg.seed, "random seed");
  pl->add_option("--jitter-deg", pl_cfg.jitter_deg, "phase jitter half-width");
  pl->add_option("--jitter-kind", pl_jkind, "uniform|gaussian")
      ->check(CLI::IsMember({"uniform", "gaussian"}));
  pl->add_option("--target-alpha", pl_cfg.target.alpha, "target cat amplitude");
  pl->add_option("--target-s", pl_cfg.target.s, "target cat squeeze");
  pl->add_option("--target-parity", pl_parity, "even|odd")
      ->check(CLI::IsMember({"even", "odd"}));
  pl->add_option("--eta-det", pl_cfg.tomo.eta_det, "detection efficiency");
  pl->add_option("--cutoff", pl_cfg.tomo.cutoff, "Fock cutoff");
  pl->add_option("--bin-width", pl_cfg.tomo.bin_width, "tomography bin width");
  pl->add_option("--x-max", pl_cfg.tomo.x_max, "tomography bin range");
  pl->add_option("--phases-deg", pl_cfg.tomo.phases_deg, "phases in degrees");
  pl->add_option("--max-iters", pl_cfg.tomo.max_iters, "MLE iteration cap");
  pl->add_option("--tol", pl_cfg.tomo.tol, "MLE tolerance");
  pl->add_option("--replicas", pl_cfg.replicas, "bootstrap replicas");
  pl->add_option("--out-dir", pl_cfg.out_dir,
                 "output directory ('' disables files)");

  // report
  std::string rp_dir = default_out_dir();
  double rp_alpha = 1.63, rp_s = 1.52;
  auto* rp = app.add_subcommand("report", "summarize a finished pipeline run");
  rp->add_option("--dir", rp_dir, "pipeline output directory");
  rp->add_option("--target-alpha", rp_alpha, "target cat amplitude");
  rp->add_option("--target-s", rp_s, "target cat squeeze");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pm->parsed()) return cmd_photon_model(g, h, eta, xi);
    if (jg->parsed())
      return cmd_joint_grid(jg_model, jg_phases, jg_n, jg_range, jg_dir);
    if (sm->parsed())
      return cmd_sample(sm_model, sm_theta, sm_n, sm_seed, sm_jitter, sm_jkind,
                        sm_out);
    if (cnd->parsed()) return cmd_condition(cd_in, cd_window, cd_units, cd_out);
    if (ft->parsed()) return cmd_fit(ft_ins, ft_quick);
    if (br->parsed())
      return cmd_breed(br_model, br_window, br_units, br_cutoff, br_dir);
    if (tm->parsed())
      return cmd_tomo(tm_in, tm_cfg, tm_replicas, tm_alpha, tm_s, tm_out);
    if (it->parsed())
      return cmd_iterate(it_model, it_gens, it_window, it_units, it_cutoff);
    if (pl->parsed()) {
      pl_cfg.units = parse_units(pl_units);
      pl_cfg.jitter_kind =
          pl_jkind == "gaussian" ? JitterKind::Gaussian : JitterKind::Uniform;
      pl_cfg.target.parity = pl_parity == "odd" ? Parity::Odd : Parity::Even;
      return cmd_pipeline(pl_cfg);
    }
    if (rp->parsed()) return cmd_report(rp_dir, rp_alpha, rp_s);
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const AccuracyError& e) {
    std::cerr << "accuracy error: " << e.what() << "\n";
    return kExitAccuracy;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
