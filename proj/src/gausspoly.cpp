#include "catbreed/gausspoly.hpp"

#include <cmath>

namespace catbreed {

namespace {

void add_term(PolyMap& p, const MultiIndex& idx, double c) {
  if (c == 0.0) return;
  auto [it, fresh] = p.emplace(idx, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0.0) p.erase(it);
  }
}

PolyMap poly_mul(const PolyMap& a, const PolyMap& b) {
  PolyMap out;
  for (const auto& [ia, ca] : a)
    for (const auto& [ib, cb] : b) {
      MultiIndex idx;
      for (int k = 0; k < 4; ++k) idx[k] = ia[k] + ib[k];
      add_term(out, idx, ca * cb);
    }
  return out;
}

// (coeffs . v)^n expanded as a PolyMap over up to 4 variables.
PolyMap linear_power(const Eigen::VectorXd& coeffs, int n) {
  PolyMap acc;
  add_term(acc, {0, 0, 0, 0}, 1.0);
  PolyMap lin;
  for (int j = 0; j < coeffs.size(); ++j) {
    MultiIndex idx{0, 0, 0, 0};
    idx[j] = 1;
    add_term(lin, idx, coeffs[j]);
  }
  for (int k = 0; k < n; ++k) acc = poly_mul(acc, lin);
  return acc;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

double gaussian_moment(const MultiIndex& a, const Eigen::MatrixXd& cov) {
  int d = static_cast<int>(cov.rows());
  int first = -1;
  for (int i = 0; i < d; ++i)
    if (a[i] > 0) {
      first = i;
      break;
    }
  if (first < 0) return 1.0;
  for (int i = 0; i < 4; ++i)
    if (a[i] % 2 == 1) {
      // overall odd degree vanishes; quick parity check
      int tot = 0;
      for (int j = 0; j < 4; ++j) tot += a[j];
      if (tot % 2 == 1) return 0.0;
      break;
    }
  // Stein: E[v_i v^b] = sum_j C_ij b_j E[v^{b - e_j}]
  double s = 0.0;
  MultiIndex b = a;
  b[first] -= 1;
  for (int j = 0; j < d; ++j) {
    if (b[j] == 0) continue;
    MultiIndex c = b;
    c[j] -= 1;
    s += cov(first, j) * b[j] * gaussian_moment(c, cov);
  }
  return s;
}

GaussPoly::GaussPoly(int dim)
    : dim_(dim), quad_(Eigen::MatrixXd::Zero(dim, dim)) {}

GaussPoly::GaussPoly(int dim, Eigen::MatrixXd quad, PolyMap poly)
    : dim_(dim), quad_(std::move(quad)), poly_(std::move(poly)) {}

int GaussPoly::degree() const {
  int deg = 0;
  for (const auto& [idx, c] : poly_)
    deg = std::max(deg, idx[0] + idx[1] + idx[2] + idx[3]);
  return deg;
}

double GaussPoly::evaluate(const double* v) const {
  double quad_form = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) quad_form += v[i] * quad_(i, j) * v[j];
  double g = std::exp(-0.5 * quad_form);
  double p = 0.0;
  for (const auto& [idx, c] : poly_) {
    double t = c;
    for (int k = 0; k < dim_; ++k)
      for (int e = 0; e < idx[k]; ++e) t *= v[k];
    p += t;
  }
  return p * g;
}

double GaussPoly::evaluate(double x, double p) const {
  double v[2] = {x, p};
  return evaluate(v);
}

double GaussPoly::integral() const {
  if (dim_ == 0) {
    double c = 0.0;
    for (const auto& [idx, coef] : poly_) c += coef;
    return c;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(quad_);
  if (llt.info() != Eigen::Success)
    throw AccuracyError("GaussPoly::integral: quadratic form not PD");
  Eigen::MatrixXd cov =
      llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
  double det = 1.0;
  for (int i = 0; i < dim_; ++i) det *= llt.matrixL()(i, i);
  double z = std::pow(2.0 * kPi, 0.5 * dim_) / det;
  double s = 0.0;
  for (const auto& [idx, c] : poly_) s += c * gaussian_moment(idx, cov);
  return z * s;
}

GaussPoly GaussPoly::operator*(const GaussPoly& other) const {
  if (dim_ != other.dim_)
    throw DomainError("GaussPoly: dimension mismatch in product");
  return GaussPoly(dim_, quad_ + other.quad_, poly_mul(poly_, other.poly_));
}

GaussPoly& GaussPoly::scale(double c) {
  for (auto& [idx, coef] : poly_) coef *= c;
  return *this;
}

GaussPoly GaussPoly::substitute(const Eigen::MatrixXd& L) const {
  if (L.rows() != dim_)
    throw DomainError("GaussPoly::substitute: shape mismatch");
  int nd = static_cast<int>(L.cols());
  PolyMap out;
  for (const auto& [idx, c] : poly_) {
    PolyMap term;
    add_term(term, {0, 0, 0, 0}, c);
    for (int i = 0; i < dim_; ++i)
      if (idx[i] > 0)
        term = poly_mul(term, linear_power(L.row(i).transpose(), idx[i]));
    for (const auto& [t, tc] : term) add_term(out, t, tc);
  }
  return GaussPoly(nd, L.transpose() * quad_ * L, std::move(out));
}

GaussPoly GaussPoly::integrate_out(const std::vector<int>& drop) const {
  std::vector<int> keep;
  std::vector<bool> is_drop(dim_, false);
  for (int d : drop) is_drop[d] = true;
  for (int i = 0; i < dim_; ++i)
    if (!is_drop[i]) keep.push_back(i);
  int nk = static_cast<int>(keep.size());
  int ndp = static_cast<int>(drop.size());

  Eigen::MatrixXd akk(nk, nk), akd(nk, ndp), add_m(ndp, ndp);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) akk(i, j) = quad_(keep[i], keep[j]);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < ndp; ++j) akd(i, j) = quad_(keep[i], drop[j]);
  for (int i = 0; i < ndp; ++i)
    for (int j = 0; j < ndp; ++j) add_m(i, j) = quad_(drop[i], drop[j]);

  Eigen::LLT<Eigen::MatrixXd> llt(add_m);
  if (llt.info() != Eigen::Success)
    throw AccuracyError("GaussPoly::integrate_out: dropped block not PD");
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(ndp, ndp));
  Eigen::MatrixXd mean_map = -cov * akd.transpose();  // w = M u + t
  Eigen::MatrixXd quad_new = akk - akd * cov * akd.transpose();
  double det = 1.0;
  for (int i = 0; i < ndp; ++i) det *= llt.matrixL()(i, i);
  double z = std::pow(2.0 * kPi, 0.5 * ndp) / det;

  PolyMap out;
  for (const auto& [idx, c] : poly_) {
    // split exponents into kept (a) and dropped (b)
    MultiIndex a{0, 0, 0, 0}, b{0, 0, 0, 0};
    for (int i = 0; i < nk; ++i) a[i] = idx[keep[i]];
    for (int i = 0; i < ndp; ++i) b[i] = idx[drop[i]];

    // expand prod_i (m_i(u) + t_i)^{b_i}; E over t, polynomial in u
    struct Partial {
      PolyMap upoly;
      MultiIndex texp;
      double coef;
    };
    std::vector<Partial> parts;
    PolyMap base;
    MultiIndex aidx{0, 0, 0, 0};
    for (int i = 0; i < nk; ++i) aidx[i] = a[i];
    add_term(base, aidx, c);
    parts.push_back({base, {0, 0, 0, 0}, 1.0});
    for (int i = 0; i < ndp; ++i) {
      if (b[i] == 0) continue;
      std::vector<Partial> next;
      for (const auto& part : parts) {
        for (int k = 0; k <= b[i]; ++k) {
          Partial np = part;
          np.coef *= binom(b[i], k);
          np.texp[i] += k;
          if (b[i] - k > 0)
            np.upoly = poly_mul(
                np.upoly, linear_power(mean_map.row(i).transpose(), b[i] - k));
          next.push_back(std::move(np));
        }
      }
      parts = std::move(next);
    }
    for (const auto& part : parts) {
      double mom = gaussian_moment(part.texp, cov);
      if (mom == 0.0) continue;
      for (const auto& [u, uc] : part.upoly)
        add_term(out, u, uc * part.coef * mom * z);
    }
  }
  return GaussPoly(nk, std::move(quad_new), std::move(out));
}

}  // namespace catbreed
