#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <vector>

#include "catbreed/common.hpp"

namespace catbreed {

// Exponent tuple for up to 4 variables; unused slots stay 0.
using MultiIndex = std::array<int, 4>;
using PolyMap = std::map<MultiIndex, double>;

// f(v) = poly(v) * exp(-1/2 v^T quad v), quad symmetric positive definite.
// Closed under products, linear substitutions and Gaussian marginalization,
// which is all the phase-space model needs.
class GaussPoly {
 public:
  explicit GaussPoly(int dim);
  GaussPoly(int dim, Eigen::MatrixXd quad, PolyMap poly);

  int dim() const { return dim_; }
  const Eigen::MatrixXd& quad() const { return quad_; }
  const PolyMap& poly() const { return poly_; }
  int degree() const;

  double evaluate(const double* v) const;
  double evaluate(double x, double p) const;  // dim 2 convenience

  // Total integral over R^dim, exact via Gaussian moments.
  double integral() const;

  GaussPoly operator*(const GaussPoly& other) const;
  GaussPoly& scale(double c);

  // Substitute v = L v' (L is dim x new_dim); result lives in v'.
  GaussPoly substitute(const Eigen::MatrixXd& L) const;

  // Integrate out the listed variables, exactly.
  GaussPoly integrate_out(const std::vector<int>& drop) const;

 private:
  int dim_;
  Eigen::MatrixXd quad_;
  PolyMap poly_;
};

// Central Gaussian moment E[v^a] for covariance C (Isserlis recursion).
double gaussian_moment(const MultiIndex& a, const Eigen::MatrixXd& cov);

}  // namespace catbreed
