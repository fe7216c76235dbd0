#include <cmath>
#include <random>

#include "catbreed/fock.hpp"
#include "catbreed/quadrature.hpp"
#include "doctest.h"

using namespace catbreed;

TEST_CASE("hermite wavefunction values") {
  CHECK(hermite_wavefunction(0, 0.0) ==
        doctest::Approx(std::pow(kPi, -0.25)).epsilon(1e-12));
  CHECK(hermite_wavefunction(1, 0.0) == doctest::Approx(0.0));
  // H2(0) = -2 with (2^n n!)^{-1/2} normalization
  double ratio = hermite_wavefunction(2, 0.0) / hermite_wavefunction(0, 0.0);
  CHECK(ratio == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(hermite_wavefunction(-1, 0.0), DomainError);
  // no overflow for large n
  CHECK(std::isfinite(hermite_wavefunction(60, 3.0)));
}

TEST_CASE("hermite orthonormality by quadrature") {
  QuadRule q = gauss_legendre(400, -12.0, 12.0);
  for (int m = 0; m <= 10; ++m)
    for (int n = m; n <= 10; ++n) {
      double s = 0.0;
      for (size_t i = 0; i < q.nodes.size(); ++i)
        s += q.weights[i] * hermite_wavefunction(m, q.nodes[i]) *
             hermite_wavefunction(n, q.nodes[i]);
      CHECK(s == doctest::Approx(m == n ? 1.0 : 0.0).scale(1).epsilon(1e-9));
    }
}

TEST_CASE("squeezed cat reproduces the 0.61 / 0.79 expansion") {
  FockVector cat = make_squeezed_cat({1.63, 1.52, Parity::Even}, 20);
  CHECK(std::abs(cat.amps[0]) == doctest::Approx(0.61).epsilon(0.01));
  CHECK(std::abs(cat.amps[2]) == doctest::Approx(0.79).epsilon(0.01));
  for (int n = 1; n <= 19; n += 2) CHECK(std::abs(cat.amps[n]) == 0.0);
  CHECK(cat.norm2() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero-amplitude even cat is vacuum") {
  FockVector cat = make_squeezed_cat({0.0, 1.0, Parity::Even}, 20);
  CHECK(std::abs(cat.amps[0]) == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 1; n <= 20; ++n)
    CHECK(std::abs(cat.amps[n]) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("cat fidelity anchor with the n=1 bred state") {
  FockVector one = FockVector::fock(1, 20);
  TwoModeState two = beamsplitter_2mode(one, one, 0.5);
  FockVector bred = homodyne_project(two, 0.0, 0.0);
  bred.normalize();
  CHECK(std::abs(bred.amps[0]) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(std::abs(bred.amps[2]) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  FockVector cat = make_squeezed_cat({1.63, 1.52, Parity::Even}, 20);
  double f = std::norm((cat.amps.adjoint() * bred.amps)(0));
  CHECK(f == doctest::Approx(0.99).epsilon(0.01));
}

TEST_CASE("cutoff doubling leaves fidelities unchanged") {
  FockVector cat20 = make_squeezed_cat({1.63, 1.52, Parity::Even}, 20);
  FockVector cat40 = make_squeezed_cat({1.63, 1.52, Parity::Even}, 40);
  FockVector one20 = FockVector::fock(1, 20);
  FockVector one40 = FockVector::fock(1, 40);
  FockVector b20 = homodyne_project(beamsplitter_2mode(one20, one20, 0.5), 0.0, 0.0);
  FockVector b40 = homodyne_project(beamsplitter_2mode(one40, one40, 0.5), 0.0, 0.0);
  b20.normalize();
  b40.normalize();
  double f20 = std::norm((cat20.amps.adjoint() * b20.amps)(0));
  double f40 = std::norm((cat40.amps.adjoint() * b40.amps)(0));
  CHECK(std::abs(f20 - f40) < 1e-6);
}

TEST_CASE("fidelity basics") {
  FockVector cat = make_squeezed_cat({1.2, 1.3, Parity::Even}, 15);
  DensityMatrix rho = pure_density(cat);
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
  DensityMatrix v0 = pure_density(FockVector::fock(0, 15));
  DensityMatrix v1 = pure_density(FockVector::fock(1, 15));
  CHECK(fidelity(v0, v1) == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  // symmetry
  CHECK(fidelity(rho, v0) == doctest::Approx(fidelity(v0, rho)).epsilon(1e-7));
  // monotone under mixing toward either argument
  DensityMatrix mix = 0.5 * rho + 0.5 * v0;
  CHECK(fidelity(mix, v0) > fidelity(rho, v0));
  CHECK(fidelity(mix, rho) > fidelity(v0, rho));
  // invalid input rejected
  DensityMatrix bad = v0;
  bad(3, 3) = 0.5;
  bad(0, 0) = 0.5;
  bad(3, 0) = 0.9;
  bad(0, 3) = 0.9;  // not PSD
  CHECK_THROWS_AS(fidelity(bad, v0), DomainError);
}

TEST_CASE("beamsplitter Hong-Ou-Mandel and unitarity") {
  FockVector one = FockVector::fock(1, 10);
  TwoModeState hom = beamsplitter_2mode(one, one, 0.5);
  CHECK(std::abs(hom.coeff(1, 1)) < 1e-14);
  CHECK(std::abs(hom.coeff(2, 0) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(hom.coeff(0, 2) + 1.0 / std::sqrt(2.0)) < 1e-12);

  FockVector vac = FockVector::vacuum(10);
  TwoModeState vv = beamsplitter_2mode(vac, vac, 0.3);
  CHECK(std::abs(vv.coeff(0, 0) - 1.0) < 1e-14);

  TwoModeState ov = beamsplitter_2mode(one, vac, 0.5);
  CHECK(std::abs(std::abs(ov.coeff(1, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(std::abs(ov.coeff(0, 1)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(ov.norm2() == doctest::Approx(1.0).epsilon(1e-12));

  // norm preservation on random inputs
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    FockVector a, b;
    a.amps = Eigen::VectorXcd::Zero(13);
    b.amps = Eigen::VectorXcd::Zero(13);
    for (int n = 0; n <= 6; ++n) {
      a.amps[n] = cd(u(rng), u(rng));
      b.amps[n] = cd(u(rng), u(rng));
    }
    a.normalize();
    b.normalize();
    TwoModeState st = beamsplitter_2mode(a, b, 0.25 + 0.5 * u(rng) * 0.5 + 0.25);
    CHECK(st.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(beamsplitter_2mode(FockVector::fock(6, 10),
                                     FockVector::fock(6, 10), 0.5),
                  TruncationError);
}

TEST_CASE("homodyne projection of a product state factorizes") {
  FockVector vac = FockVector::vacuum(8);
  TwoModeState vv = beamsplitter_2mode(vac, vac, 0.5);
  for (double x : {0.0, 0.7, -1.3}) {
    FockVector proj = homodyne_project(vv, x, 0.0);
    CHECK(std::abs(proj.amps[0] - hermite_wavefunction(0, x)) < 1e-12);
    for (int m = 1; m <= 8; ++m) CHECK(std::abs(proj.amps[m]) < 1e-12);
  }
}

TEST_CASE("breed_fock window limit and vacuum case") {
  FockVector one = FockVector::fock(1, 12);
  BreedResult tiny = breed_fock(one, one, 1e-7, Units::Internal);
  FockVector eq1 = homodyne_project(beamsplitter_2mode(one, one, 0.5), 0.0, 0.0);
  eq1.normalize();
  CHECK(fidelity(eq1, tiny.rho) >= 0.9999);

  FockVector vac = FockVector::vacuum(12);
  BreedResult bv = breed_fock(vac, vac, 0.5, Units::Internal);
  CHECK(std::abs(bv.rho(0, 0) - 1.0) < 1e-10);

  CHECK_THROWS_AS(breed_fock(one, one, -0.1, Units::Internal), DomainError);
}

TEST_CASE("breed_fock acceptance is monotone in window size") {
  FockVector one = FockVector::fock(1, 12);
  double prev = 0.0;
  for (double w : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    BreedResult r = breed_fock(one, one, w, Units::Homodyne);
    CHECK(r.acceptance > prev);
    prev = r.acceptance;
  }
}

TEST_CASE("parity conservation in breeding") {
  FockVector one = FockVector::fock(1, 16);
  FockVector three = FockVector::fock(3, 16);
  BreedResult r = breed_fock(one, three, 1e-6, Units::Internal);
  for (int n = 1; n <= 15; n += 2) CHECK(std::abs(r.rho(n, n)) < 1e-10);
}

TEST_CASE("apply_loss examples and composition") {
  FockVector one = FockVector::fock(1, 8);
  DensityMatrix r1 = pure_density(one);
  DensityMatrix lossy = apply_loss(r1, 0.77);
  CHECK(std::abs(lossy(1, 1) - 0.77) < 1e-12);
  CHECK(std::abs(lossy(0, 0) - 0.23) < 1e-12);

  FockVector cat = make_squeezed_cat({1.3, 1.2, Parity::Even}, 14);
  DensityMatrix rho = pure_density(cat);
  CHECK((apply_loss(rho, 1.0) - rho).cwiseAbs().maxCoeff() < 1e-14);
  DensityMatrix dead = apply_loss(rho, 0.0);
  CHECK(std::abs(dead(0, 0) - 1.0) < 1e-12);

  DensityMatrix ab = apply_loss(apply_loss(rho, 0.9), 0.8);
  DensityMatrix prod = apply_loss(rho, 0.72);
  CHECK((ab - prod).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(ab.trace().real() - 1.0) < 1e-12);

  CHECK_THROWS_AS(apply_loss(rho, 1.5), DomainError);
}

TEST_CASE("wigner_of_state peak values") {
  GridSpec spec;
  spec.nx = spec.np = 241;
  spec.xmin = spec.pmin = -6;
  spec.xmax = spec.pmax = 6;
  DensityMatrix vac = pure_density(FockVector::vacuum(10));
  WignerGrid wv = wigner_of_state(vac, spec);
  CHECK(wv.values.maxCoeff() == doctest::Approx(1.0 / kPi).epsilon(1e-10));
  CHECK(wv.integral() == doctest::Approx(1.0).epsilon(1e-4));

  DensityMatrix one = pure_density(FockVector::fock(1, 10));
  CHECK(wigner_point(one, 0.0, 0.0) == doctest::Approx(-1.0 / kPi).epsilon(1e-12));
}

TEST_CASE("wigner phase convention matches quadrature marginals") {
  // state with complex amplitudes; marginal of W along theta must equal
  // |sum_n c_n phi_n(x) e^{-i n theta}|^2
  FockVector psi;
  psi.amps = Eigen::VectorXcd::Zero(9);
  psi.amps[0] = 0.6;
  psi.amps[1] = cd(0.3, 0.55);
  psi.amps[2] = cd(-0.2, 0.4);
  psi.normalize();
  DensityMatrix rho = pure_density(psi);
  QuadRule q = gauss_legendre(200, -8.0, 8.0);
  for (double theta : {0.0, 0.7, kPi / 2}) {
    for (double x : {0.4, -1.1}) {
      // numeric marginal: rotate (x,p) and integrate over p
      double m = 0.0;
      for (size_t i = 0; i < q.nodes.size(); ++i) {
        double xp = x * std::cos(theta) - q.nodes[i] * std::sin(theta);
        double pp = x * std::sin(theta) + q.nodes[i] * std::cos(theta);
        m += q.weights[i] * wigner_point(rho, xp, pp);
      }
      cd amp = 0.0;
      for (int n = 0; n <= 8; ++n)
        amp += psi.amps[n] * hermite_wavefunction(n, x) * std::polar(1.0, -n * theta);
      CHECK(m == doctest::Approx(std::norm(amp)).epsilon(1e-8));
    }
  }
}

TEST_CASE("best_fit_cat identifies the bred state") {
  FockVector one = FockVector::fock(1, 20);
  FockVector eq1 = homodyne_project(beamsplitter_2mode(one, one, 0.5), 0.0, 0.0);
  eq1.normalize();
  CatFit fit = best_fit_cat(pure_density(eq1), 0.0, 3.0, 0.8, 2.5);
  CHECK(fit.alpha == doctest::Approx(1.63).epsilon(0.03));
  CHECK(fit.s == doctest::Approx(1.52).epsilon(0.03));
  CHECK(fit.fidelity == doctest::Approx(0.99).epsilon(0.01));
  CHECK_FALSE(fit.on_boundary);

  CatFit vf = best_fit_cat(pure_density(FockVector::vacuum(20)), 0.0, 2.0, 0.8, 2.0);
  CHECK(vf.alpha < 0.1);
  CHECK(vf.fidelity == doctest::Approx(1.0).epsilon(1e-4));
}
