#include <cmath>

#include "catbreed/fock.hpp"
#include "catbreed/wigner_model.hpp"
#include "doctest.h"

using namespace catbreed;

TEST_CASE("imperfect photon parameters from gains") {
  SinglePhotonModel m = imperfect_photon_params({1.03, 1.0, 1.0, 1.0});
  CHECK(m.sigma * m.sigma == doctest::Approx(1.06).epsilon(1e-12));
  CHECK(m.delta == doctest::Approx(2.0 * 1.03 / 1.06).epsilon(1e-12));

  SinglePhotonModel lim = imperfect_photon_params({1.0 + 1e-9, 1.0, 1.0, 1.0});
  CHECK(lim.sigma == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lim.delta == doctest::Approx(2.0).epsilon(1e-6));

  CHECK_THROWS_AS(imperfect_photon_params({1.0, 1.0, 1.0, 1.0}), DomainError);
}

TEST_CASE("imperfect photon Wigner function values") {
  GaussPoly ideal = imperfect_photon_wigner({1.0, 2.0});
  CHECK(ideal.evaluate(0.0, 0.0) == doctest::Approx(-1.0 / kPi).epsilon(1e-12));
  CHECK(ideal.integral() == doctest::Approx(1.0).epsilon(1e-12));

  GaussPoly vac = imperfect_photon_wigner({1.0, 0.0});
  CHECK(vac.evaluate(0.3, -0.4) ==
        doctest::Approx(std::exp(-0.25) / kPi).epsilon(1e-12));

  GaussPoly paper = imperfect_photon_wigner({1.02, 1.17});
  CHECK(paper.evaluate(0.0, 0.0) ==
        doctest::Approx((1.0 - 1.17) / (kPi * 1.0404)).epsilon(1e-10));
}

TEST_CASE("closed-form joint density: values, symmetry, normalization") {
  SinglePhotonModel ideal{1.0, 2.0};
  CHECK(joint_prob_closed(0, 0, kPi / 2, ideal) ==
        doctest::Approx(1.0 / kPi).epsilon(1e-12));
  CHECK(joint_prob_closed(1, 1, kPi, ideal) == doctest::Approx(0.0).scale(1).epsilon(1e-12));

  SinglePhotonModel paper{1.02, 1.17};
  for (double th : {0.3, 1.1, 2.0})
    for (double x0 : {0.5, -1.2})
      for (double x1 : {0.0, 0.9}) {
        double a = joint_prob_closed(x0, x1, th, paper);
        double b = joint_prob_closed(x0, x1, kPi - th, paper);
        CHECK(a == doctest::Approx(b).epsilon(1e-13));
        CHECK(joint_prob_closed(x0, x1, -th, paper) ==
              doctest::Approx(a).epsilon(1e-13));
      }
  // exchange symmetry at 180 degrees
  CHECK(joint_prob_closed(0.7, -0.2, kPi, paper) ==
        doctest::Approx(joint_prob_closed(-0.2, 0.7, kPi, paper)).epsilon(1e-13));

  // nonnegativity over a grid of parameters
  for (double sig : {1.0, 1.1, 1.2})
    for (double de : {0.0, 0.5, 1.0, 1.7, 2.0})
      for (double th : {0.0, kPi / 3, kPi / 2, kPi})
        for (double x0 = -3; x0 <= 3; x0 += 0.5)
          for (double x1 = -3; x1 <= 3; x1 += 0.5)
            CHECK(joint_prob_closed(x0, x1, th, {sig, de}) >= -1e-12);
}

TEST_CASE("numeric quadrature oracle agrees with the closed form") {
  for (auto [sig, de] : {std::pair{1.0, 2.0}, std::pair{1.02, 1.17}}) {
    SinglePhotonModel m{sig, de};
    GaussPoly w = imperfect_photon_wigner(m);
    for (double th : {kPi / 2, 2 * kPi / 3, 5 * kPi / 6, kPi}) {
      for (double x0 = -2.0; x0 <= 2.0; x0 += 0.8)
        for (double x1 = -2.0; x1 <= 2.0; x1 += 0.8) {
          double closed = joint_prob_closed(x0, x1, th, m);
          double numeric = joint_prob_numeric(x0, x1, th, w);
          CHECK(std::abs(closed - numeric) < 1e-8);
        }
    }
  }
}

TEST_CASE("breeding convolution: vacuum fixed point and normalization") {
  GaussPoly vac = imperfect_photon_wigner({1.0, 0.0});
  GaussPoly bred = breed_wigner(vac, vac, 0.2, Units::Internal);
  CHECK(bred.integral() == doctest::Approx(1.0).epsilon(1e-10));
  for (double x : {0.0, 0.7, -1.4})
    for (double p : {0.0, -0.6})
      CHECK(bred.evaluate(x, p) == doctest::Approx(vac.evaluate(x, p)).epsilon(1e-10));
  CHECK_THROWS_AS(breed_wigner(vac, vac, 0.0, Units::Internal), DomainError);
}

TEST_CASE("breeding routes agree: phase space vs Fock") {
  GaussPoly ideal = imperfect_photon_wigner({1.0, 2.0});
  FockVector one = FockVector::fock(1, 16);
  for (double window : {0.05, 0.1, 0.2, 0.3}) {
    GaussPoly wb = breed_wigner(ideal, ideal, window, Units::Internal);
    DensityMatrix from_wigner = density_matrix_from_wigner(wb, 16);
    BreedResult fock_route =
        breed_fock(one, one, window, Units::Internal, WindowKind::Gaussian);
    // clean up tiny quadrature residue before the fidelity gate
    DensityMatrix a = 0.5 * (from_wigner + from_wigner.adjoint());
    a /= a.trace().real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    a = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    a /= a.trace().real();
    CHECK(fidelity(a, fock_route.rho) >= 0.999);
  }
}

TEST_CASE("GaussPoly outputs stay normalized through the pipeline") {
  GaussPoly w = imperfect_photon_wigner({1.02, 1.17});
  GaussPoly bred = breed_wigner(w, w, 0.2, Units::Homodyne);
  CHECK(bred.integral() == doctest::Approx(1.0).epsilon(1e-10));
  GaussPoly lossy = loss_channel_wigner(bred, 0.77);
  CHECK(lossy.integral() == doctest::Approx(1.0).epsilon(1e-10));
  GaussPoly m = marginal(lossy, 0.9);
  CHECK(m.dim() == 1);
  double total = interval_mass(m, 12.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("loss channel matches the Fock route") {
  GaussPoly ideal = imperfect_photon_wigner({1.0, 2.0});
  GaussPoly lossy = loss_channel_wigner(ideal, 0.77);
  CHECK(lossy.evaluate(0.0, 0.0) ==
        doctest::Approx(-0.54 / kPi).epsilon(1e-10));

  // compare against apply_loss on grids
  DensityMatrix one = apply_loss(pure_density(FockVector::fock(1, 10)), 0.77);
  for (double x : {0.0, 0.5, 1.5})
    for (double p : {0.0, -0.8})
      CHECK(lossy.evaluate(x, p) ==
            doctest::Approx(wigner_point(one, x, p)).scale(1).epsilon(1e-8));

  // eta = 1 identity, eta = 0 vacuum
  GaussPoly same = loss_channel_wigner(ideal, 1.0);
  CHECK(same.evaluate(0.4, 0.2) == doctest::Approx(ideal.evaluate(0.4, 0.2)));
  GaussPoly dead = loss_channel_wigner(ideal, 0.0);
  CHECK(dead.evaluate(0.0, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-12));
}

TEST_CASE("negativity scans") {
  GaussPoly ideal = imperfect_photon_wigner({1.0, 2.0});
  CHECK(negativity(ideal) == doctest::Approx(-1.0 / kPi).epsilon(1e-9));
  GaussPoly vac = imperfect_photon_wigner({1.0, 0.0});
  CHECK(negativity(vac) >= 0.0);
  CHECK(negativity(vac) == doctest::Approx(0.0).scale(1).epsilon(1e-6));

  GaussPoly w = imperfect_photon_wigner({1.02, 1.17});
  GaussPoly bred = breed_wigner(w, w, 0.2, Units::Homodyne);
  CHECK(negativity(bred) < 0.0);
}

TEST_CASE("marginals") {
  GaussPoly vac = imperfect_photon_wigner({1.0, 0.0});
  GaussPoly mv = marginal(vac, 0.0);
  // Gaussian with variance 1/2
  double x = 0.9;
  CHECK(mv.evaluate(&x) ==
        doctest::Approx(std::exp(-x * x) / std::sqrt(kPi)).epsilon(1e-12));

  GaussPoly one = imperfect_photon_wigner({1.0, 2.0});
  for (double xv : {0.0, 0.4, 1.3}) {
    double expected = 2.0 * xv * xv * std::exp(-xv * xv) / std::sqrt(kPi);
    GaussPoly m0 = marginal(one, 0.0);
    CHECK(m0.evaluate(&xv) == doctest::Approx(expected).scale(1).epsilon(1e-12));
  }
  // rotational symmetry of the phase-symmetric photon state
  GaussPoly w = imperfect_photon_wigner({1.02, 1.17});
  GaussPoly a = marginal(w, 0.0), b = marginal(w, 1.1), c = marginal(w, kPi / 2);
  for (double xv = -3.0; xv <= 3.0; xv += 0.37) {
    CHECK(std::abs(a.evaluate(&xv) - b.evaluate(&xv)) < 1e-10);
    CHECK(std::abs(a.evaluate(&xv) - c.evaluate(&xv)) < 1e-10);
  }
}

TEST_CASE("analytic acceptance fraction near the paper's 15 percent") {
  GaussPoly w = imperfect_photon_wigner({1.02, 1.17});
  double frac_homodyne = analytic_acceptance(w, w, 0.2 / std::sqrt(2.0));
  double frac_internal = analytic_acceptance(w, w, 0.2);
  CHECK(frac_homodyne == doctest::Approx(0.1046).epsilon(0.01));
  CHECK(frac_internal == doctest::Approx(0.1471).epsilon(0.01));
}

TEST_CASE("degree cap raises instead of truncating") {
  GaussPoly w = imperfect_photon_wigner({1.0, 2.0});
  CHECK_THROWS_AS(breed_wigner(w, w, 0.1, Units::Internal, 2), DomainError);
  GaussPoly ok = breed_wigner(w, w, 0.1, Units::Internal, 4);
  CHECK(ok.degree() <= 4);
}
