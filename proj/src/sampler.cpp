#include "catbreed/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "catbreed/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catbreed {

namespace {

using detail::Rng;

constexpr int kChunks = 64;  // fixed, so output is thread-count independent

// Upper bound M for joint_prob_closed / gaussian-envelope ratio, valid for
// every phase (cos^2 between 0 and 1). Envelope: independent N(0, 0.6 sigma^2)
// per axis.
struct Envelope {
  double env_var;
  double bound;

  explicit Envelope(const SinglePhotonModel& m) {
    double s2 = m.sigma * m.sigma;
    double de = m.delta;
    env_var = 0.6 * s2;
    // bracket <= a u^2 + b u + c with u = x0^2 + x1^2
    double a = de * de;
    double b = s2 * de * std::max(4.0 - 2.0 * de, 0.0);
    double c = s2 * s2 * (4.0 - 4.0 * de + 2.0 * de * de);
    double k = 1.0 / (6.0 * s2);  // exponent gap between target and envelope
    // max over u >= 0 of (a u^2 + b u + c) e^{-k u}
    double peak = c;
    double qa = k * a, qb = k * b - 2.0 * a, qc = k * c - b;
    double disc = qb * qb - 4.0 * qa * qc;
    if (qa > 0.0 && disc >= 0.0) {
      for (double root : {(-qb + std::sqrt(disc)) / (2.0 * qa),
                          (-qb - std::sqrt(disc)) / (2.0 * qa)}) {
        if (root > 0.0)
          peak = std::max(peak,
                          (a * root * root + b * root + c) * std::exp(-k * root));
      }
    } else if (qa == 0.0 && qb != 0.0) {
      double root = -qc / qb;
      if (root > 0.0)
        peak = std::max(peak, (b * root + c) * std::exp(-k * root));
    }
    double prefactor = env_var / (2.0 * s2 * s2 * s2);
    bound = prefactor * peak * (1.0 + 1e-12);
  }
};

double envelope_density(double x0, double x1, double var) {
  return std::exp(-(x0 * x0 + x1 * x1) / (2.0 * var)) / (2.0 * kPi * var);
}

std::vector<int> chunk_sizes(int n) {
  std::vector<int> sizes(kChunks, n / kChunks);
  for (int c = 0; c < n % kChunks; ++c) ++sizes[c];
  return sizes;
}

template <typename Worker>
void run_chunks(int n, uint64_t seed, ExecPolicy exec,
                std::vector<std::vector<SampleRecord>>& out, Worker worker) {
  std::vector<int> sizes = chunk_sizes(n);
  out.assign(kChunks, {});
  auto body = [&](int c) {
    Rng rng(derive_seed(seed, c));
    out[c].reserve(sizes[c]);
    worker(rng, sizes[c], out[c]);
  };
  if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < kChunks; ++c) body(c);
  } else {
    for (int c = 0; c < kChunks; ++c) body(c);
  }
}

}  // namespace

std::vector<std::pair<double, size_t>> SampleSet::per_phase_counts() const {
  std::map<double, size_t> counts;
  for (const auto& r : records) ++counts[r.theta];
  return {counts.begin(), counts.end()};
}

void SampleSet::append(const SampleSet& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

SampleSet sample_joint(const SinglePhotonModel& m, double theta, int n,
                       uint64_t seed, double phase_jitter_deg,
                       JitterKind jitter, ExecPolicy exec) {
  if (n < 1) throw DomainError("sample_joint: n must be >= 1");
  if (phase_jitter_deg < 0.0)
    throw DomainError("sample_joint: jitter must be >= 0");
  Envelope env(m);
  double jitter_rad = phase_jitter_deg * kPi / 180.0;

  std::vector<std::vector<SampleRecord>> chunks;
  run_chunks(n, seed, exec, chunks,
             [&](Rng& rng, int count, std::vector<SampleRecord>& out) {
               double sd = std::sqrt(env.env_var);
               for (int i = 0; i < count; ++i) {
                 double th = theta;
                 if (jitter_rad > 0.0) {
                   if (jitter == JitterKind::Uniform)
                     th += jitter_rad * (2.0 * rng.uniform() - 1.0);
                   else
                     th += (jitter_rad / std::sqrt(3.0)) * rng.normal();
                 }
                 for (;;) {
                   double x0 = sd * rng.normal();
                   double x1 = sd * rng.normal();
                   double target = joint_prob_closed(x0, x1, th, m);
                   double cap = env.bound * envelope_density(x0, x1, env.env_var);
                   if (target > cap)
                     throw AccuracyError(
                         "sample_joint: rejection envelope violated");
                   if (rng.uniform() * cap < target) {
                     out.push_back({x0, x1, theta, false});
                     break;
                   }
                 }
               }
             });

  SampleSet set;
  set.units = Units::Internal;
  set.seed = seed;
  set.model = m;
  set.jitter_deg = phase_jitter_deg;
  set.jitter_kind = jitter;
  for (auto& c : chunks)
    set.records.insert(set.records.end(), c.begin(), c.end());
  return set;
}

SampleSet sample_photon_plus_vacuum(const SinglePhotonModel& m, int n,
                                    uint64_t seed, ExecPolicy exec) {
  if (n < 1) throw DomainError("sample_photon_plus_vacuum: n must be >= 1");
  double s2 = m.sigma * m.sigma;
  double de = m.delta;
  // 1D envelope for the photon marginal f(x) = e^{-x^2/s2}/(sqrt(pi) s)
  //   * [1 - de/2 + de x^2 / s2]
  double env_var = 0.6 * s2;
  double a = de / s2, c = std::max(1.0 - 0.5 * de, 0.0);
  double k = 1.0 / (6.0 * s2);
  double peak = c;
  if (a > 0.0) {
    double u = 1.0 / k - c / a;
    if (u > 0.0) peak = std::max(peak, (a * u + c) * std::exp(-k * u));
  }
  // ratio f/q with q = N(0, env_var): prefactor sqrt(2 pi env_var)/(sqrt(pi) s)
  double prefactor = std::sqrt(2.0 * kPi * env_var) / (std::sqrt(kPi) * m.sigma);
  double bound = prefactor * peak * (1.0 + 1e-12);

  std::vector<std::vector<SampleRecord>> chunks;
  run_chunks(n, seed, exec, chunks,
             [&](Rng& rng, int count, std::vector<SampleRecord>& out) {
               double sd = std::sqrt(env_var);
               double inv = 1.0 / std::sqrt(2.0);
               for (int i = 0; i < count; ++i) {
                 double xp;  // photon-mode quadrature
                 for (;;) {
                   double x = sd * rng.normal();
                   double f = std::exp(-x * x / s2) /
                              (std::sqrt(kPi) * m.sigma) *
                              (1.0 - 0.5 * de + de * x * x / s2);
                   double cap = bound *
                                std::exp(-x * x / (2.0 * env_var)) /
                                std::sqrt(2.0 * kPi * env_var);
                   if (f > cap)
                     throw AccuracyError(
                         "sample_photon_plus_vacuum: envelope violated");
                   if (rng.uniform() * cap < f) {
                     xp = x;
                     break;
                   }
                 }
                 double xv = std::sqrt(0.5) * rng.normal();  // vacuum arm
                 // photon enters port b: x' = (x0 - x1)/sqrt(2)
                 out.push_back({(xv + xp) * inv, (xv - xp) * inv, 0.0, false});
               }
             });

  SampleSet set;
  set.units = Units::Internal;
  set.seed = seed;
  set.model = m;
  for (auto& ch : chunks)
    set.records.insert(set.records.end(), ch.begin(), ch.end());
  return set;
}

ConditionResult condition(const SampleSet& s, double window, Units units) {
  if (window <= 0.0) throw DomainError("condition: window must be > 0");
  double w = window;
  if (units == Units::Homodyne && s.units == Units::Internal)
    w = window / std::sqrt(2.0);
  else if (units == Units::Internal && s.units == Units::Homodyne)
    w = window * std::sqrt(2.0);

  ConditionResult res;
  res.accepted = s;
  res.accepted.records.clear();
  for (const auto& r : s.records) {
    if (std::abs(r.x0) <= w) {
      SampleRecord a = r;
      a.accepted = true;
      res.accepted.records.push_back(a);
    }
  }
  size_t n = s.records.size();
  size_t k = res.accepted.records.size();
  res.fraction = n ? double(k) / double(n) : 0.0;
  res.std_error =
      n ? std::sqrt(res.fraction * (1.0 - res.fraction) / double(n)) : 0.0;
  res.empty = (k == 0);
  return res;
}

Histogram2D histogram2d(const SampleSet& s, int bins, double lo, double hi) {
  if (bins < 2) throw DomainError("histogram2d: bins must be >= 2");
  if (!(lo < hi)) throw DomainError("histogram2d: non-monotone edges");
  Histogram2D h;
  h.x_edges.resize(bins + 1);
  h.y_edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i)
    h.x_edges[i] = h.y_edges[i] = lo + (hi - lo) * i / bins;
  h.counts = Eigen::MatrixXd::Zero(bins, bins);
  double width = (hi - lo) / bins;
  for (const auto& r : s.records) {
    int i = static_cast<int>(std::floor((r.x0 - lo) / width));
    int j = static_cast<int>(std::floor((r.x1 - lo) / width));
    ++h.total;
    if (i < 0 || i >= bins || j < 0 || j >= bins) {
      ++h.overflow;
      continue;
    }
    h.counts(i, j) += 1.0;
  }
  return h;
}

namespace {

double log_likelihood(const SampleSet& s, double sigma, double delta) {
  double ll = 0.0;
  SinglePhotonModel m{sigma, delta};
  for (const auto& r : s.records) {
    double p = joint_prob_closed(r.x0, r.x1, r.theta, m);
    ll += std::log(std::max(p, 1e-300));
  }
  return ll;
}

}  // namespace

SigmaDeltaFit fit_sigma_delta(const SampleSet& s, ExecPolicy exec) {
  if (s.records.empty()) throw DomainError("fit_sigma_delta: empty sample set");
  const double sig_lo = 1.0, sig_hi = 1.5, del_lo = 0.0, del_hi = 2.0;

  double lo_s = sig_lo, hi_s = sig_hi, lo_d = del_lo, hi_d = del_hi;
  double best_s = lo_s, best_d = lo_d;
  double best_ll = -std::numeric_limits<double>::infinity();
  int ns = 26, nd = 41;
  for (int level = 0; level < 4; ++level) {
    std::vector<double> lls(ns * nd);
    auto cell = [&](int idx) {
      int i = idx / nd, j = idx % nd;
      double sg = lo_s + (hi_s - lo_s) * i / (ns - 1);
      double dl = lo_d + (hi_d - lo_d) * j / (nd - 1);
      lls[idx] = log_likelihood(s, sg, dl);
    };
    if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
      for (int idx = 0; idx < ns * nd; ++idx) cell(idx);
    } else {
      for (int idx = 0; idx < ns * nd; ++idx) cell(idx);
    }
    // iterate delta ascending; strict improvement keeps ties at smaller delta
    for (int j = 0; j < nd; ++j)
      for (int i = 0; i < ns; ++i) {
        double ll = lls[i * nd + j];
        if (ll > best_ll) {
          best_ll = ll;
          best_s = lo_s + (hi_s - lo_s) * i / (ns - 1);
          best_d = lo_d + (hi_d - lo_d) * j / (nd - 1);
        }
      }
    double span_s = (hi_s - lo_s) * 0.1, span_d = (hi_d - lo_d) * 0.1;
    lo_s = std::max(sig_lo, best_s - span_s);
    hi_s = std::min(sig_hi, best_s + span_s);
    lo_d = std::max(del_lo, best_d - span_d);
    hi_d = std::min(del_hi, best_d + span_d);
    ns = nd = 13;
  }

  SigmaDeltaFit fit;
  fit.sigma = best_s;
  fit.delta = best_d;
  fit.log_likelihood = best_ll;
  fit.on_boundary = (best_s <= sig_lo + 1e-9) || (best_s >= sig_hi - 1e-6) ||
                    (best_d <= del_lo + 1e-9) || (best_d >= del_hi - 1e-9);

  // observed information from a central-difference Hessian
  double hs = 2e-3, hd = 4e-3;
  auto ll = [&](double sg, double dl) {
    return log_likelihood(s, std::max(sg, 1e-6), std::clamp(dl, 0.0, 2.0));
  };
  double l0 = best_ll;
  double dss = (ll(best_s + hs, best_d) - 2 * l0 + ll(best_s - hs, best_d)) / (hs * hs);
  double ddd = (ll(best_s, best_d + hd) - 2 * l0 + ll(best_s, best_d - hd)) / (hd * hd);
  double dsd = (ll(best_s + hs, best_d + hd) - ll(best_s + hs, best_d - hd) -
                ll(best_s - hs, best_d + hd) + ll(best_s - hs, best_d - hd)) /
               (4 * hs * hd);
  double det = dss * ddd - dsd * dsd;
  if (dss < 0.0 && det > 0.0) {
    fit.sigma_err = std::sqrt(-ddd / det);
    fit.delta_err = std::sqrt(-dss / det);
    fit.converged = true;
  } else {
    fit.converged = false;
  }
  return fit;
}

SampleSet degrade_efficiency(const SampleSet& s, double eta, uint64_t seed) {
  if (eta <= 0.0 || eta > 1.0)
    throw DomainError("degrade_efficiency: eta must be in (0, 1]");
  SampleSet out = s;
  if (eta == 1.0) return out;
  Rng rng(derive_seed(seed, 0));
  double keep = std::sqrt(eta), mix = std::sqrt((1.0 - eta) * 0.5);
  for (auto& r : out.records) r.x1 = keep * r.x1 + mix * rng.normal();
  return out;
}

DeltaEstimate estimate_delta_quick(const SampleSet& s) {
  if (s.records.size() < 10)
    throw DomainError("estimate_delta_quick: too few samples");
  double inv = 1.0 / std::sqrt(2.0);
  double m2 = 0.0, m4 = 0.0;
  for (const auto& r : s.records) {
    double xp = (r.x0 - r.x1) * inv;
    double x2 = xp * xp;
    m2 += x2;
    m4 += x2 * x2;
  }
  m2 /= s.records.size();
  m4 /= s.records.size();

  // m2 = sigma^2 (1 + delta)/2, m4 = (3 sigma^4/4)(1 + 2 delta)
  double k = m4 / (3.0 * m2 * m2);
  DeltaEstimate est;
  if (1.0 - k >= 0.0) {
    est.delta = ((1.0 - k) + std::sqrt(1.0 - k)) / k;
  } else {
    est.delta = (1.0 - k) / k;  // below-vacuum kurtosis, out of model
  }
  est.in_model = est.delta >= -1e-6 && est.delta <= 2.0 + 1e-6;
  est.sigma = std::sqrt(2.0 * m2 / (1.0 + std::clamp(est.delta, 0.0, 2.0)));
  return est;
}

}  // namespace catbreed
