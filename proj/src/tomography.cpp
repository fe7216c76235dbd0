#include "catbreed/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "catbreed/quadrature.hpp"
#include "catbreed/rng.hpp"
#include "catbreed/wigner_model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catbreed {

namespace {

// real bin matrix G_mn = integral of phi_m phi_n over [a, b]
Eigen::MatrixXd bin_overlap(int cutoff, double a, double b, int nodes) {
  int d = cutoff + 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  QuadRule q = gauss_legendre(nodes, a, b);
  for (size_t i = 0; i < q.nodes.size(); ++i) {
    std::vector<double> phi = hermite_wavefunctions(cutoff, q.nodes[i]);
    for (int m = 0; m < d; ++m)
      for (int n = 0; n <= m; ++n) g(m, n) += q.weights[i] * phi[m] * phi[n];
  }
  for (int m = 0; m < d; ++m)
    for (int n = m + 1; n < d; ++n) g(m, n) = g(n, m);
  return g;
}

// adjoint of the Bernoulli loss map, E*(P)_mn = sum_k c_k(m) c_k(n) P_{m-k,n-k}
Eigen::MatrixXcd loss_adjoint(const Eigen::MatrixXcd& p, double eta) {
  int d = static_cast<int>(p.rows());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);  // c(n, k)
  for (int n = 0; n < d; ++n)
    for (int k = 0; k <= n; ++k) {
      double lb = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                         std::lgamma(n - k + 1.0));
      c(n, k) = std::exp(lb + 0.5 * (n - k) * std::log(eta) +
                         0.5 * k * std::log1p(-eta));
    }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) {
      cd acc = 0.0;
      for (int k = 0; k <= std::min(m, n); ++k)
        acc += c(m, k) * c(n, k) * p(m - k, n - k);
      out(m, n) = acc;
    }
  return out;
}

double trace_prod(const DensityMatrix& rho, const Eigen::MatrixXcd& op) {
  return rho.cwiseProduct(op.transpose()).sum().real();
}

// target cat projected onto the working truncation; built generously so the
// construction itself never overflows small cutoffs
FockVector target_cat(const SqueezedCatSpec& spec, int cutoff) {
  FockVector big = make_squeezed_cat(spec, std::max(cutoff, 40));
  FockVector out;
  out.amps = big.amps.head(cutoff + 1);
  out.normalize();
  return out;
}

}  // namespace

PovmSet build_homodyne_povm(const TomographyConfig& cfg) {
  if (cfg.eta_det <= 0.0 || cfg.eta_det > 1.0)
    throw DomainError("build_homodyne_povm: eta_det must be in (0, 1]");
  if (cfg.cutoff < 1) throw DomainError("build_homodyne_povm: cutoff < 1");
  if (cfg.bin_width <= 0.0 || cfg.x_max <= 0.0 || cfg.tol <= 0.0)
    throw DomainError("build_homodyne_povm: nonpositive bin spec or tolerance");
  if (cfg.phases_deg.empty())
    throw DomainError("build_homodyne_povm: empty phase list");

  int d = cfg.cutoff + 1;
  int interior = static_cast<int>(std::round(2.0 * cfg.x_max / cfg.bin_width));
  // quadrature eigenfunctions of the truncated space die off past
  // sqrt(2 cutoff + 1); integrate the tails out to well beyond that
  double tail_end = std::max(cfg.x_max + 2.0, std::sqrt(2.0 * cfg.cutoff + 1.0) + 6.0);

  std::vector<Eigen::MatrixXd> real_bins;
  real_bins.reserve(interior + 2);
  Eigen::MatrixXd upper = bin_overlap(cfg.cutoff, cfg.x_max, tail_end, 200);
  Eigen::MatrixXd lower = upper;
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      if ((m + n) % 2) lower(m, n) = -upper(m, n);
  real_bins.push_back(lower);
  for (int b = 0; b < interior; ++b) {
    double a = -cfg.x_max + b * cfg.bin_width;
    real_bins.push_back(bin_overlap(cfg.cutoff, a, a + cfg.bin_width, 8));
  }
  real_bins.push_back(upper);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (const auto& g : real_bins) sum += g;
  double defect = (sum - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (defect > 1e-8)
    throw AccuracyError(
        "build_homodyne_povm: bin operators do not resolve the identity; "
        "increase the bin range or lower the cutoff");

  PovmSet set;
  set.cfg = cfg;
  set.per_phase = interior + 2;
  int num_phases = static_cast<int>(cfg.phases_deg.size());
  double scale = 1.0 / num_phases;
  for (int ph = 0; ph < num_phases; ++ph) {
    double theta = cfg.phases_deg[ph] * kPi / 180.0;
    Eigen::MatrixXcd rot(d, d);
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        rot(m, n) = std::polar(1.0, (m - n) * theta);
    for (const auto& g : real_bins) {
      Eigen::MatrixXcd op = scale * rot.cwiseProduct(g.cast<cd>());
      if (cfg.eta_det < 1.0) op = loss_adjoint(op, cfg.eta_det);
      set.ops.push_back(0.5 * (op + Eigen::MatrixXcd(op.adjoint())));
      set.phase_index.push_back(ph);
    }
  }
  return set;
}

BinnedCounts bin_counts(const SampleSet& s, const PovmSet& povm) {
  const TomographyConfig& cfg = povm.cfg;
  int num_phases = static_cast<int>(cfg.phases_deg.size());
  BinnedCounts out;
  out.counts.assign(povm.ops.size(), 0);
  out.per_phase_total.assign(num_phases, 0);
  int interior = povm.per_phase - 2;
  for (const auto& r : s.records) {
    int ph = -1;
    for (int p = 0; p < num_phases; ++p)
      if (std::abs(r.theta - cfg.phases_deg[p] * kPi / 180.0) < 1e-6) {
        ph = p;
        break;
      }
    if (ph < 0)
      throw DomainError("bin_counts: sample phase not in the POVM phase list");
    int b;
    if (r.x1 < -cfg.x_max)
      b = 0;
    else if (r.x1 >= cfg.x_max)
      b = povm.per_phase - 1;
    else
      b = 1 + std::min(interior - 1,
                       static_cast<int>((r.x1 + cfg.x_max) / cfg.bin_width));
    ++out.counts[ph * povm.per_phase + b];
    ++out.per_phase_total[ph];
    ++out.total;
  }
  return out;
}

TomographyResult mle_from_counts(const BinnedCounts& data, const PovmSet& povm) {
  const TomographyConfig& cfg = povm.cfg;
  if (data.total <= 0) throw DomainError("mle_from_counts: no counts");
  int d = cfg.cutoff + 1;
  size_t nops = povm.ops.size();

  TomographyResult res;
  res.rho = DensityMatrix::Identity(d, d) / d;

  std::vector<size_t> active;
  for (size_t i = 0; i < nops; ++i)
    if (data.counts[i] > 0) active.push_back(i);

  auto log_likelihood = [&](const DensityMatrix& rho) {
    double ll = 0.0;
    for (size_t i : active) {
      double p = trace_prod(rho, povm.ops[i]);
      if (p < 1e-12) {
        p = 1e-12;
        res.probability_floored = true;
      }
      ll += data.counts[i] * std::log(p);
    }
    return ll;
  };
  auto r_operator = [&](const DensityMatrix& rho) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(d, d);
    for (size_t i : active) {
      double p = std::max(trace_prod(rho, povm.ops[i]), 1e-12);
      r += (double(data.counts[i]) / data.total / p) * povm.ops[i];
    }
    return r;
  };
  auto renorm = [&](DensityMatrix m) {
    m = 0.5 * (m + DensityMatrix(m.adjoint()));
    m /= m.trace().real();
    return m;
  };

  double ll = log_likelihood(res.rho);
  res.likelihood_trace.push_back(ll);
  for (int it = 0; it < cfg.max_iters; ++it) {
    Eigen::MatrixXcd r = r_operator(res.rho);
    DensityMatrix cand = renorm(r * res.rho * r);
    double cand_ll = log_likelihood(cand);
    if (cand_ll < ll) {
      // damp the step until the likelihood stops decreasing
      bool improved = false;
      Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
      for (double eps = 0.5; eps > 1e-6; eps *= 0.5) {
        Eigen::MatrixXcd rd = (id + eps * r) / (1.0 + eps);
        DensityMatrix damp = renorm(rd * res.rho * rd);
        double damp_ll = log_likelihood(damp);
        if (damp_ll >= ll) {
          cand = damp;
          cand_ll = damp_ll;
          improved = true;
          res.used_dilution = true;
          break;
        }
      }
      if (!improved) {  // no ascent direction left, treat as a fixed point
        res.converged = true;
        res.iterations = it;
        break;
      }
    }
    res.rho = cand;
    res.iterations = it + 1;
    res.likelihood_trace.push_back(cand_ll);
    if (cand_ll - ll < cfg.tol) {
      ll = cand_ll;
      res.converged = true;
      break;
    }
    ll = cand_ll;
  }
  res.log_likelihood = ll;
  for (size_t i = 1; i < res.likelihood_trace.size(); ++i)
    if (res.likelihood_trace[i] < res.likelihood_trace[i - 1])
      throw AccuracyError("mle_from_counts: likelihood decreased");
  validate_density(res.rho, 1e-8, 1e-8, 1e-7);
  return res;
}

TomographyResult mle_reconstruct(const SampleSet& s, const PovmSet& povm) {
  return mle_from_counts(bin_counts(s, povm), povm);
}

ReplicaStats mc_error_bars(const TomographyResult& fit, const PovmSet& povm,
                           const std::vector<long>& per_phase_total,
                           const SqueezedCatSpec& target, int replicas,
                           uint64_t seed, ExecPolicy exec) {
  if (replicas < 10) throw DomainError("mc_error_bars: need at least 10 replicas");
  const TomographyConfig& cfg = povm.cfg;
  int num_phases = static_cast<int>(cfg.phases_deg.size());
  if (static_cast<int>(per_phase_total.size()) != num_phases)
    throw DomainError("mc_error_bars: per-phase totals do not match the POVM");

  // predicted bin probabilities under the fit, renormalized per phase
  std::vector<std::vector<double>> cdf(num_phases);
  for (int ph = 0; ph < num_phases; ++ph) {
    std::vector<double>& c = cdf[ph];
    c.resize(povm.per_phase);
    double run = 0.0;
    for (int b = 0; b < povm.per_phase; ++b) {
      run += std::max(trace_prod(fit.rho, povm.ops[ph * povm.per_phase + b]), 0.0);
      c[b] = run;
    }
    for (double& v : c) v /= run;
  }

  FockVector cat = target_cat(target, cfg.cutoff);
  std::vector<double> negs(replicas), fids(replicas);
  std::vector<char> ok(replicas, 0);

  auto run_replica = [&](int r) {
    detail::Rng rng(derive_seed(seed, r));
    BinnedCounts data;
    data.counts.assign(povm.ops.size(), 0);
    data.per_phase_total.assign(num_phases, 0);
    for (int ph = 0; ph < num_phases; ++ph) {
      for (long k = 0; k < per_phase_total[ph]; ++k) {
        double u = rng.uniform();
        const std::vector<double>& c = cdf[ph];
        int b = static_cast<int>(
            std::lower_bound(c.begin(), c.end(), u) - c.begin());
        b = std::min(b, povm.per_phase - 1);
        ++data.counts[ph * povm.per_phase + b];
      }
      data.per_phase_total[ph] = per_phase_total[ph];
      data.total += per_phase_total[ph];
    }
    TomographyResult refit = mle_from_counts(data, povm);
    negs[r] = negativity(refit.rho, ExecPolicy::Serial);
    fids[r] = fidelity(cat, refit.rho);
    ok[r] = refit.converged ? 1 : 2;  // 2: capped fit, excluded by default
  };

  if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < replicas; ++r) run_replica(r);
  } else {
    for (int r = 0; r < replicas; ++r) run_replica(r);
  }

  ReplicaStats st;
  int converged = 0;
  for (int r = 0; r < replicas; ++r)
    if (ok[r] == 1) ++converged;
  // with almost nothing converged the spread of the capped fits is still the
  // best available error estimate; flag it instead of failing the run
  st.included_nonconverged = converged < 2;
  double sn = 0, sn2 = 0, sf = 0, sf2 = 0;
  for (int r = 0; r < replicas; ++r) {
    if (ok[r] != 1 && !st.included_nonconverged) {
      ++st.replicas_excluded;
      continue;
    }
    ++st.replicas_used;
    sn += negs[r];
    sn2 += negs[r] * negs[r];
    sf += fids[r];
    sf2 += fids[r] * fids[r];
  }
  if (st.replicas_used < 2)
    throw AccuracyError("mc_error_bars: too few usable replicas");
  int n = st.replicas_used;
  st.negativity_mean = sn / n;
  st.fidelity_mean = sf / n;
  st.negativity_std = std::sqrt(std::max(0.0, (sn2 - sn * sn / n) / (n - 1)));
  st.fidelity_std = std::sqrt(std::max(0.0, (sf2 - sf * sf / n) / (n - 1)));
  return st;
}

StateSummary negativity_and_fidelity_report(const DensityMatrix& rho,
                                            const SqueezedCatSpec& target,
                                            Correction correction,
                                            double eta_det) {
  validate_density(rho);
  StateSummary s;
  s.correction = correction;
  DensityMatrix state =
      correction == Correction::Efficiency ? rho : apply_loss(rho, eta_det);
  s.negativity = negativity(state);
  FockVector cat = target_cat(target, static_cast<int>(rho.rows()) - 1);
  s.fidelity = fidelity(cat, state);
  return s;
}

}  // namespace catbreed
