#pragma once

#include <Eigen/Dense>

#include "catbreed/common.hpp"

namespace catbreed {

struct GridSpec {
  double xmin = -6.0, xmax = 6.0;
  double pmin = -6.0, pmax = 6.0;
  int nx = 601, np = 601;

  double x(int i) const { return xmin + (xmax - xmin) * i / (nx - 1); }
  double p(int j) const { return pmin + (pmax - pmin) * j / (np - 1); }
  double dx() const { return (xmax - xmin) / (nx - 1); }
  double dp() const { return (pmax - pmin) / (np - 1); }
};

struct WignerGrid {
  GridSpec spec;
  Eigen::MatrixXd values;  // values(i, j) = W(x_i, p_j), internal units
  bool coverage_warning = false;

  // Trapezoid integral over the grid (interior points dominate; the
  // states of interest decay to ~0 well inside +-6).
  double integral() const {
    double s = 0.0;
    for (int i = 0; i < spec.nx; ++i) {
      double wx = (i == 0 || i == spec.nx - 1) ? 0.5 : 1.0;
      double row = 0.0;
      for (int j = 0; j < spec.np; ++j) {
        double wp = (j == 0 || j == spec.np - 1) ? 0.5 : 1.0;
        row += wp * values(i, j);
      }
      s += wx * row;
    }
    return s * spec.dx() * spec.dp();
  }

  double min_value() const { return values.minCoeff(); }
};

}  // namespace catbreed
