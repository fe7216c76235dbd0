#include "catbreed/wigner_model.hpp"

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "catbreed/quadrature.hpp"

namespace catbreed {

SinglePhotonModel imperfect_photon_params(const PhotonSourceParams& p) {
  if (p.g <= 0 || p.h <= 0 || p.eta_path <= 0 || p.xi <= 0)
    throw DomainError("imperfect_photon_params: all parameters must be > 0");
  if (p.eta_path > 1.0 || p.xi > 1.0)
    throw DomainError("imperfect_photon_params: eta, xi must be <= 1");
  double hg = p.h * p.g;
  if (hg <= 1.0)
    throw DomainError("imperfect_photon_params: hg <= 1, singular denominator");
  double s2 = 2.0 * p.eta_path * (hg - 1.0) + 1.0;
  double delta =
      2.0 * p.xi * p.eta_path * p.h * p.h * p.g * (p.g - 1.0) / (s2 * (hg - 1.0));
  return {std::sqrt(s2), delta};
}

GaussPoly imperfect_photon_wigner(const SinglePhotonModel& m) {
  if (m.sigma < 1.0)
    throw DomainError("imperfect_photon_wigner: sigma must be >= 1");
  if (m.delta < 0.0 || m.delta > 2.0)
    throw DomainError("imperfect_photon_wigner: delta must be in [0,2]");
  double s2 = m.sigma * m.sigma;
  Eigen::MatrixXd quad = Eigen::MatrixXd::Zero(2, 2);
  quad(0, 0) = quad(1, 1) = 2.0 / s2;
  PolyMap poly;
  poly[{0, 0, 0, 0}] = (1.0 - m.delta) / (kPi * s2);
  poly[{2, 0, 0, 0}] = m.delta / (kPi * s2 * s2);
  poly[{0, 2, 0, 0}] = m.delta / (kPi * s2 * s2);
  return GaussPoly(2, std::move(quad), std::move(poly));
}

double joint_prob_closed(double x0, double x1, double theta,
                         const SinglePhotonModel& m) {
  double s2 = m.sigma * m.sigma;
  double de = m.delta;
  double c = std::cos(theta);
  double c2 = c * c;
  double r2 = x0 * x0 + x1 * x1;
  double bracket = de * de * r2 * r2 +
                   r2 * s2 * de * (2.0 * de * c2 + 4.0 - 4.0 * de) -
                   4.0 * de * de * x0 * x0 * x1 * x1 * c2 +
                   s2 * s2 * (4.0 - 4.0 * de + de * de * (2.0 - c2));
  return std::exp(-r2 / s2) / (4.0 * kPi * s2 * s2 * s2) * bracket;
}

double joint_prob_numeric(double x0, double x1, double theta,
                          const GaussPoly& w, int n_nodes, double range) {
  QuadRule q = gauss_legendre(n_nodes, -range, range);
  double ct = std::cos(theta), st = std::sin(theta);
  double inv = 1.0 / std::sqrt(2.0);
  double total = 0.0;
  for (int i = 0; i < n_nodes; ++i) {
    double p0 = q.nodes[i];
    double row = 0.0;
    for (int j = 0; j < n_nodes; ++j) {
      double p1 = q.nodes[j];
      double X = x1 * ct - p1 * st;
      double P = p1 * ct + x1 * st;
      row += q.weights[j] * w.evaluate((x0 + X) * inv, (p0 + P) * inv) *
             w.evaluate((x0 - X) * inv, (p0 - P) * inv);
    }
    total += q.weights[i] * row;
  }
  return total;
}

namespace {

// (x0,p0,x1,p1) -> the two beamsplitter input arguments
Eigen::MatrixXd bs_plus_map() {
  Eigen::MatrixXd L(2, 4);
  double c = 1.0 / std::sqrt(2.0);
  L << c, 0, c, 0, 0, c, 0, c;
  return L;
}

Eigen::MatrixXd bs_minus_map() {
  Eigen::MatrixXd L(2, 4);
  double c = 1.0 / std::sqrt(2.0);
  L << c, 0, -c, 0, 0, c, 0, -c;
  return L;
}

GaussPoly two_mode_product(const GaussPoly& wa, const GaussPoly& wb) {
  return wa.substitute(bs_plus_map()) * wb.substitute(bs_minus_map());
}

}  // namespace

GaussPoly breed_wigner(const GaussPoly& wa, const GaussPoly& wb, double window,
                       Units units, int max_degree) {
  if (window <= 0.0) throw DomainError("breed_wigner: window must be > 0");
  double d = to_internal(window, units);
  GaussPoly joint = two_mode_product(wa, wb);
  Eigen::MatrixXd kq = Eigen::MatrixXd::Zero(4, 4);
  kq(0, 0) = 1.0 / (d * d);
  PolyMap one;
  one[{0, 0, 0, 0}] = 1.0;
  GaussPoly kernel(4, std::move(kq), std::move(one));
  GaussPoly out = (joint * kernel).integrate_out({0, 1});
  if (max_degree >= 0 && out.degree() > max_degree)
    throw DomainError("breed_wigner: polynomial degree " +
                      std::to_string(out.degree()) + " exceeds cap " +
                      std::to_string(max_degree));
  double norm = out.integral();
  if (!(norm > 0.0))
    throw AccuracyError("breed_wigner: non-positive normalization");
  out.scale(1.0 / norm);
  return out;
}

GaussPoly loss_channel_wigner(const GaussPoly& w, double eta) {
  if (eta < 0.0 || eta > 1.0)
    throw DomainError("loss_channel_wigner: eta must be in [0,1]");
  if (eta == 1.0) return w;
  if (eta == 0.0) {
    Eigen::MatrixXd quad = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    PolyMap poly;
    poly[{0, 0, 0, 0}] = 1.0 / kPi;
    return GaussPoly(2, std::move(quad), std::move(poly));
  }
  Eigen::MatrixXd sel(2, 4);
  sel << 0, 0, 1, 0, 0, 0, 0, 1;  // input state lives on (x', p')
  GaussPoly inner = w.substitute(sel);

  double a = 2.0 / (1.0 - eta);
  double b = -2.0 * std::sqrt(eta) / (1.0 - eta);
  double c = 2.0 * eta / (1.0 - eta);
  Eigen::MatrixXd kq = Eigen::MatrixXd::Zero(4, 4);
  kq(0, 0) = kq(1, 1) = a;
  kq(2, 2) = kq(3, 3) = c;
  kq(0, 2) = kq(2, 0) = b;
  kq(1, 3) = kq(3, 1) = b;
  PolyMap kp;
  kp[{0, 0, 0, 0}] = 1.0 / (kPi * (1.0 - eta));
  GaussPoly kernel(4, std::move(kq), std::move(kp));

  GaussPoly out = (inner * kernel).integrate_out({2, 3});
  double norm = out.integral();
  out.scale(1.0 / norm);
  return out;
}

namespace {

template <typename Eval>
double scan_minimum(const Eval& f, ExecPolicy exec) {
  const double box = 6.0;
  const int n = 601;  // step 0.02
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0, best_j = 0;

  std::vector<double> row_min(n);
  std::vector<int> row_arg(n);
  auto scan_row = [&](int i) {
    double x = -box + 2.0 * box * i / (n - 1);
    double m = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int j = 0; j < n; ++j) {
      double p = -box + 2.0 * box * j / (n - 1);
      double v = f(x, p);
      if (v < m) {
        m = v;
        arg = j;
      }
    }
    row_min[i] = m;
    row_arg[i] = arg;
  };
  if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) scan_row(i);
  } else {
    for (int i = 0; i < n; ++i) scan_row(i);
  }
  for (int i = 0; i < n; ++i)
    if (row_min[i] < best) {
      best = row_min[i];
      best_i = i;
      best_j = row_arg[i];
    }

  // local refinement around the coarse minimum
  double cx = -box + 2.0 * box * best_i / (n - 1);
  double cp = -box + 2.0 * box * best_j / (n - 1);
  double half = 0.03;
  for (int level = 0; level < 3; ++level) {
    const int nn = 41;
    double bx = cx, bp = cp;
    for (int i = 0; i < nn; ++i)
      for (int j = 0; j < nn; ++j) {
        double x = cx - half + 2 * half * i / (nn - 1);
        double p = cp - half + 2 * half * j / (nn - 1);
        double v = f(x, p);
        if (v < best) {
          best = v;
          bx = x;
          bp = p;
        }
      }
    cx = bx;
    cp = bp;
    half *= 0.1;
  }
  return best;
}

}  // namespace

double negativity(const GaussPoly& w, ExecPolicy exec) {
  return scan_minimum([&](double x, double p) { return w.evaluate(x, p); },
                      exec);
}

double negativity(const WignerGrid& grid) { return grid.min_value(); }

double negativity(const DensityMatrix& rho, ExecPolicy exec) {
  return scan_minimum(
      [&](double x, double p) { return wigner_point(rho, x, p); }, exec);
}

GaussPoly marginal(const GaussPoly& w, double theta) {
  if (w.dim() != 2) throw DomainError("marginal: expects a 2D Wigner function");
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return w.substitute(rot).integrate_out({1});
}

double interval_mass(const GaussPoly& marg, double a) {
  if (marg.dim() != 1) throw DomainError("interval_mass: expects 1D density");
  QuadRule q = gauss_legendre(96, -a, a);
  double s = 0.0;
  for (size_t i = 0; i < q.nodes.size(); ++i)
    s += q.weights[i] * marg.evaluate(&q.nodes[i]);
  return s;
}

double analytic_acceptance(const GaussPoly& wa, const GaussPoly& wb,
                           double window_internal) {
  GaussPoly joint = two_mode_product(wa, wb);
  GaussPoly marg_x0 = joint.integrate_out({1, 2, 3});
  return interval_mass(marg_x0, window_internal);
}

WignerGrid wigner_grid_of(const GaussPoly& w, const GridSpec& spec,
                          ExecPolicy exec) {
  WignerGrid grid;
  grid.spec = spec;
  grid.values.resize(spec.nx, spec.np);
  if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < spec.nx; ++i)
      for (int j = 0; j < spec.np; ++j)
        grid.values(i, j) = w.evaluate(spec.x(i), spec.p(j));
  } else {
    for (int i = 0; i < spec.nx; ++i)
      for (int j = 0; j < spec.np; ++j)
        grid.values(i, j) = w.evaluate(spec.x(i), spec.p(j));
  }
  grid.coverage_warning = std::abs(grid.integral() - 1.0) > 1e-4;
  return grid;
}

DensityMatrix density_matrix_from_wigner(const GaussPoly& w, int cutoff,
                                         int n_nodes, double range) {
  QuadRule q = gauss_legendre(n_nodes, -range, range);
  int N = cutoff;
  std::vector<Eigen::MatrixXcd> partial(
      n_nodes, Eigen::MatrixXcd::Zero(N + 1, N + 1));

#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_nodes; ++i) {
    double x = q.nodes[i];
    Eigen::MatrixXcd& acc = partial[i];
    for (int j = 0; j < n_nodes; ++j) {
      double p = q.nodes[j];
      double wt = q.weights[i] * q.weights[j] * w.evaluate(x, p) * 2.0 * kPi;
      if (wt == 0.0) continue;
      for (int m = 0; m <= N; ++m)
        for (int n = 0; n <= m; ++n)
          acc(m, n) += wt * std::conj(fock_wigner_kernel(m, n, x, p));
    }
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(N + 1, N + 1);
  for (int i = 0; i < n_nodes; ++i) rho += partial[i];
  for (int m = 0; m <= N; ++m)
    for (int n = 0; n < m; ++n) rho(n, m) = std::conj(rho(m, n));
  return rho;
}

}  // namespace catbreed
