#include "catbreed/fock.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "catbreed/quadrature.hpp"

namespace catbreed {

double hermite_wavefunction(int n, double x) {
  if (n < 0) throw DomainError("hermite_wavefunction: n must be >= 0");
  double p0 = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n == 0) return p0;
  double p1 = std::sqrt(2.0) * x * p0;
  for (int k = 1; k < n; ++k) {
    double p2 =
        std::sqrt(2.0 / (k + 1)) * x * p1 - std::sqrt(double(k) / (k + 1)) * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> hermite_wavefunctions(int nmax, double x) {
  if (nmax < 0) throw DomainError("hermite_wavefunctions: nmax must be >= 0");
  std::vector<double> out(nmax + 1);
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (nmax == 0) return out;
  out[1] = std::sqrt(2.0) * x * out[0];
  for (int k = 1; k < nmax; ++k)
    out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] -
                 std::sqrt(double(k) / (k + 1)) * out[k - 1];
  return out;
}

void FockVector::normalize() {
  double n = std::sqrt(norm2());
  if (n < 1e-300) throw DomainError("FockVector::normalize: zero norm");
  amps /= n;
}

int FockVector::max_populated(double tol) const {
  for (int n = cutoff(); n >= 0; --n)
    if (std::abs(amps[n]) > tol) return n;
  return 0;
}

FockVector FockVector::fock(int n, int cutoff) {
  if (n < 0 || n > cutoff) throw DomainError("FockVector::fock: bad n");
  FockVector v;
  v.amps = Eigen::VectorXcd::Zero(cutoff + 1);
  v.amps[n] = 1.0;
  return v;
}

FockVector make_squeezed_cat(const SqueezedCatSpec& spec, int cutoff) {
  if (cutoff < 10) throw DomainError("make_squeezed_cat: cutoff must be >= 10");
  if (spec.s <= 0.0) throw DomainError("make_squeezed_cat: s must be > 0");
  double sign = spec.parity == Parity::Even ? 1.0 : -1.0;
  double c = std::sqrt(2.0) * spec.alpha;

  double L = std::max(12.0, std::abs(c) / spec.s + 10.0);
  QuadRule q = gauss_legendre(800, -L, L);
  int m = static_cast<int>(q.nodes.size());

  // psi(x) proportional to exp(-(s x - c)^2/2) + sign * exp(-(s x + c)^2/2)
  std::vector<double> psi(m);
  double nrm2 = 0.0;
  for (int i = 0; i < m; ++i) {
    double sx = spec.s * q.nodes[i];
    psi[i] = std::exp(-0.5 * (sx - c) * (sx - c)) +
             sign * std::exp(-0.5 * (sx + c) * (sx + c));
    nrm2 += q.weights[i] * psi[i] * psi[i];
  }
  if (nrm2 < 1e-12)
    throw DomainError("make_squeezed_cat: zero-norm superposition");
  double inv = 1.0 / std::sqrt(nrm2);

  FockVector v;
  v.amps = Eigen::VectorXcd::Zero(cutoff + 1);
  int keep_parity = spec.parity == Parity::Even ? 0 : 1;
  double captured = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    if (n % 2 != keep_parity) continue;  // opposite parity vanishes exactly
    double cn = 0.0;
    for (int i = 0; i < m; ++i)
      cn += q.weights[i] * hermite_wavefunction(n, q.nodes[i]) * psi[i];
    cn *= inv;
    v.amps[n] = cn;
    captured += cn * cn;
  }
  if (captured < 1.0 - 1e-6)
    throw TruncationError("make_squeezed_cat: cutoff holds only " +
                          std::to_string(captured) + " of the norm");
  v.normalize();
  return v;
}

DensityMatrix pure_density(const FockVector& v) {
  return v.amps * v.amps.adjoint();
}

void validate_density(const DensityMatrix& rho, double herm_tol,
                      double trace_tol, double eig_tol) {
  if (rho.rows() != rho.cols())
    throw DomainError("validate_density: non-square matrix");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
    throw DomainError("validate_density: not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > trace_tol ||
      std::abs(rho.trace().imag()) > trace_tol)
    throw DomainError("validate_density: trace != 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                     Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -eig_tol)
    throw DomainError("validate_density: negative eigenvalue " +
                      std::to_string(es.eigenvalues().minCoeff()));
}

namespace {

Eigen::MatrixXcd matrix_sqrt_psd(const DensityMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.rows() != b.rows())
    throw DomainError("fidelity: cutoff mismatch");
  validate_density(a);
  validate_density(b);
  Eigen::MatrixXcd sa = matrix_sqrt_psd(a);
  Eigen::MatrixXcd m = sa * b * sa;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    s += std::sqrt(std::max(0.0, es.eigenvalues()[i]));
  return std::min(1.0, s * s);
}

double fidelity(const FockVector& psi, const DensityMatrix& rho) {
  if (psi.amps.size() != rho.rows())
    throw DomainError("fidelity: cutoff mismatch");
  return (psi.amps.adjoint() * rho * psi.amps)(0).real();
}

TwoModeState beamsplitter_2mode(const FockVector& a, const FockVector& b,
                                double transmittance) {
  if (transmittance <= 0.0 || transmittance >= 1.0)
    throw DomainError("beamsplitter_2mode: transmittance must be in (0,1)");
  if (a.cutoff() != b.cutoff())
    throw DomainError("beamsplitter_2mode: cutoff mismatch");
  int N = a.cutoff();
  if (a.max_populated() + b.max_populated() > N)
    throw TruncationError(
        "beamsplitter_2mode: combined photon number exceeds cutoff");

  double t = transmittance, r = 1.0 - transmittance;
  std::vector<double> lg(2 * N + 2);
  for (int k = 0; k <= 2 * N + 1; ++k) lg[k] = std::lgamma(k + 1.0);
  auto lbinom = [&](int n, int k) { return lg[n] - lg[k] - lg[n - k]; };

  TwoModeState out;
  out.coeff = Eigen::MatrixXcd::Zero(N + 1, N + 1);
  for (int n = 0; n <= N; ++n) {
    for (int m = 0; m <= N - n; ++m) {
      cd c = a.amps[n] * b.amps[m];
      if (std::abs(c) < 1e-300) continue;
      for (int j = 0; j <= n; ++j) {
        for (int k = 0; k <= m; ++k) {
          int J = j + k, K = (n - j) + (m - k);
          double sign = ((m - k) % 2 == 0) ? 1.0 : -1.0;
          double lamp = lbinom(n, j) + lbinom(m, k) +
                        0.5 * (std::log(t) * (j + (m - k)) +
                               std::log(r) * ((n - j) + k)) +
                        0.5 * (lg[J] + lg[K] - lg[n] - lg[m]);
          out.coeff(J, K) += c * sign * std::exp(lamp);
        }
      }
    }
  }
  return out;
}

FockVector homodyne_project(const TwoModeState& st, double x_value,
                            double theta) {
  int N = static_cast<int>(st.coeff.rows()) - 1;
  std::vector<double> phi = hermite_wavefunctions(N, x_value);
  FockVector out;
  out.amps = Eigen::VectorXcd::Zero(N + 1);
  for (int m = 0; m <= N; ++m) {
    cd s = 0.0;
    for (int n = 0; n <= N; ++n) {
      cd w = std::polar(phi[n], -n * theta);
      s += w * st.coeff(n, m);
    }
    out.amps[m] = s;
  }
  return out;
}

BreedResult breed_fock(const FockVector& a, const FockVector& b, double window,
                       Units units, WindowKind kind) {
  if (window <= 0.0) throw DomainError("breed_fock: window must be > 0");
  double w = to_internal(window, units);
  TwoModeState two = beamsplitter_2mode(a, b, 0.5);
  int N = a.cutoff();

  QuadRule q;
  if (kind == WindowKind::Hard) {
    q = gauss_legendre(64, -w, w);
  } else {
    double range = std::min(8.0 * w, 10.0);
    q = gauss_legendre(128, -range, range);
  }

  DensityMatrix rho = DensityMatrix::Zero(N + 1, N + 1);
  double acc = 0.0;
  for (size_t i = 0; i < q.nodes.size(); ++i) {
    double xi = q.nodes[i];
    double wt = q.weights[i];
    if (kind == WindowKind::Gaussian)
      wt *= std::exp(-xi * xi / (2.0 * w * w));
    FockVector psi = homodyne_project(two, xi, 0.0);
    acc += wt * psi.norm2();
    rho.noalias() += wt * (psi.amps * psi.amps.adjoint());
  }
  if (acc < 1e-12)
    throw DomainError("breed_fock: degenerate window, acceptance < 1e-12");
  rho /= rho.trace().real();
  return {rho, acc};
}

DensityMatrix apply_loss(const DensityMatrix& rho, double eta) {
  if (eta < 0.0 || eta > 1.0)
    throw DomainError("apply_loss: eta must be in [0,1]");
  int N = static_cast<int>(rho.rows()) - 1;
  if (eta == 1.0) return rho;
  if (eta == 0.0) {
    DensityMatrix out = DensityMatrix::Zero(N + 1, N + 1);
    out(0, 0) = 1.0;
    return out;
  }
  std::vector<double> lg(N + 2);
  for (int k = 0; k <= N + 1; ++k) lg[k] = std::lgamma(k + 1.0);
  DensityMatrix out = DensityMatrix::Zero(N + 1, N + 1);
  for (int k = 0; k <= N; ++k) {
    // K_k = sum_n sqrt(C(n,k) eta^{n-k} (1-eta)^k) |n-k><n|
    Eigen::VectorXd diag(N + 1 - k);
    for (int n = k; n <= N; ++n) {
      double lc = lg[n] - lg[k] - lg[n - k];
      diag[n - k] = std::exp(
          0.5 * (lc + (n - k) * std::log(eta) + k * std::log1p(-eta)));
    }
    // out += K rho K^dagger, exploiting the shift structure
    for (int i = 0; i <= N - k; ++i)
      for (int j = 0; j <= N - k; ++j)
        out(i, j) += diag[i] * diag[j] * rho(i + k, j + k);
  }
  return out;
}

namespace {

// Wigner kernel sum for one phase-space point. Kernel of |m><n| (m >= n):
// (1/pi) (-1)^n sqrt(n!/m!) (sqrt(2)(x-ip))^{m-n} e^{-r^2} L_n^{m-n}(2 r^2).
double wigner_point_impl(const DensityMatrix& rho,
                         const std::vector<std::vector<double>>& fr, double x,
                         double p) {
  int N = static_cast<int>(rho.rows()) - 1;
  double r2 = x * x + p * p;
  double g = std::exp(-r2) / kPi;
  double u = 2.0 * r2;
  cd z = std::sqrt(2.0) * cd(x, -p);
  double w = 0.0;
  cd zk = 1.0;
  for (int k = 0; k <= N; ++k) {  // k = m - n
    // associated Laguerre L_n^{(k)}(u) by upward recurrence in n
    double lprev = 0.0, ln = 1.0;
    for (int n = 0; n + k <= N; ++n) {
      int m = n + k;
      double sign = (n % 2 == 0) ? 1.0 : -1.0;
      double base = sign * fr[m][n] * ln * g;
      if (k == 0)
        w += base * std::real(rho(m, n));
      else
        w += 2.0 * base * std::real(rho(m, n) * zk);
      double lnext = ((2 * n + 1 + k - u) * ln - (n + k) * lprev) / (n + 1);
      lprev = ln;
      ln = lnext;
    }
    zk *= z;
  }
  return w;
}

std::vector<std::vector<double>> fact_ratio_table(int N) {
  // fr[m][n] = sqrt(n!/m!), n <= m
  std::vector<std::vector<double>> fr(N + 1);
  for (int m = 0; m <= N; ++m) {
    fr[m].resize(m + 1);
    fr[m][m] = 1.0;
    for (int n = m - 1; n >= 0; --n)
      fr[m][n] = fr[m][n + 1] / std::sqrt(double(n + 1));
  }
  return fr;
}

}  // namespace

cd fock_wigner_kernel(int m, int n, double x, double p) {
  if (m < 0 || n < 0) throw DomainError("fock_wigner_kernel: negative index");
  if (m < n) return std::conj(fock_wigner_kernel(n, m, x, p));
  int k = m - n;
  double r2 = x * x + p * p;
  double u = 2.0 * r2;
  // L_n^{(k)}(u)
  double lprev = 0.0, ln = 1.0;
  for (int i = 0; i < n; ++i) {
    double lnext = ((2 * i + 1 + k - u) * ln - (i + k) * lprev) / (i + 1);
    lprev = ln;
    ln = lnext;
  }
  double fr = 1.0;  // sqrt(n!/m!)
  for (int i = n + 1; i <= m; ++i) fr /= std::sqrt(double(i));
  double sign = (n % 2 == 0) ? 1.0 : -1.0;
  cd zk = std::pow(std::sqrt(2.0) * cd(x, -p), k);
  return sign * fr * ln * std::exp(-r2) / kPi * zk;
}

double wigner_point(const DensityMatrix& rho, double x, double p) {
  static thread_local int cached_n = -1;
  static thread_local std::vector<std::vector<double>> table;
  int N = static_cast<int>(rho.rows()) - 1;
  if (cached_n != N) {
    table = fact_ratio_table(N);
    cached_n = N;
  }
  return wigner_point_impl(rho, table, x, p);
}

WignerGrid wigner_of_state(const DensityMatrix& rho, const GridSpec& spec,
                           ExecPolicy exec) {
  int N = static_cast<int>(rho.rows()) - 1;
  auto fr = fact_ratio_table(N);
  WignerGrid grid;
  grid.spec = spec;
  grid.values.resize(spec.nx, spec.np);
  if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < spec.nx; ++i)
      for (int j = 0; j < spec.np; ++j)
        grid.values(i, j) = wigner_point_impl(rho, fr, spec.x(i), spec.p(j));
  } else {
    for (int i = 0; i < spec.nx; ++i)
      for (int j = 0; j < spec.np; ++j)
        grid.values(i, j) = wigner_point_impl(rho, fr, spec.x(i), spec.p(j));
  }
  grid.coverage_warning = std::abs(grid.integral() - 1.0) > 1e-4;
  return grid;
}

CatFit best_fit_cat(const DensityMatrix& rho, double alpha_min,
                    double alpha_max, double s_min, double s_max) {
  int cutoff = static_cast<int>(rho.rows()) - 1;
  auto eval = [&](double a, double s) {
    SqueezedCatSpec spec{a, s, Parity::Even};
    try {
      FockVector cat = make_squeezed_cat(spec, cutoff);
      return fidelity(cat, rho);
    } catch (const TruncationError&) {
      return -1.0;
    }
  };

  double lo_a = alpha_min, hi_a = alpha_max, lo_s = s_min, hi_s = s_max;
  double best_a = lo_a, best_s = lo_s, best_f = -2.0;
  const int na = 33, ns = 33;
  for (int level = 0; level < 4; ++level) {
    for (int i = 0; i < na; ++i) {
      double a = lo_a + (hi_a - lo_a) * i / (na - 1);
      for (int j = 0; j < ns; ++j) {
        double s = lo_s + (hi_s - lo_s) * j / (ns - 1);
        double f = eval(a, s);
        if (f > best_f) {
          best_f = f;
          best_a = a;
          best_s = s;
        }
      }
    }
    double span_a = (hi_a - lo_a) * 0.12, span_s = (hi_s - lo_s) * 0.12;
    lo_a = std::max(alpha_min, best_a - span_a);
    hi_a = std::min(alpha_max, best_a + span_a);
    lo_s = std::max(s_min, best_s - span_s);
    hi_s = std::min(s_max, best_s + span_s);
  }
  CatFit fit{best_a, best_s, best_f, false};
  double eps_a = (alpha_max - alpha_min) * 1e-3;
  double eps_s = (s_max - s_min) * 1e-3;
  if (best_a > alpha_min + eps_a &&  // alpha ~ 0 optimum is a valid branch
      (best_a > alpha_max - eps_a || best_s < s_min + eps_s ||
       best_s > s_max - eps_s))
    fit.on_boundary = true;
  return fit;
}

}  // namespace catbreed
