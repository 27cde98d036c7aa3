#pragma once

#include "willmore_lab/errors.hpp"
#include "willmore_lab/tensor.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace willmore_lab {

struct LeastSquares {
  Eigen::VectorXd coef;
  double rms_residual = 0.0;
  double condition = 0.0;
};

/// Minimizes |A c − b| with column equilibration. Throws FitIllConditioned when
/// there are fewer rows than columns or the scaled design is numerically singular.
inline LeastSquares least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double max_condition = 1e12) {
  if (A.rows() < A.cols() || A.cols() == 0)
    throw Error(ErrorCode::fit_ill_conditioned, "not enough samples for the fit");
  Eigen::VectorXd s = A.colwise().norm().transpose();
  for (int j = 0; j < s.size(); ++j)
    if (!(s[j] > 0.0)) throw Error(ErrorCode::fit_ill_conditioned, "zero column in the design matrix");
  const Eigen::MatrixXd As = A * s.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LeastSquares out;
  out.condition = sv[0] / sv[sv.size() - 1];
  if (!(out.condition < max_condition))
    throw Error(ErrorCode::fit_ill_conditioned, "design condition number " + std::to_string(out.condition));
  out.coef = svd.solve(b).cwiseQuotient(s);
  out.rms_residual = std::sqrt((A * out.coef - b).squaredNorm() / b.size());
  return out;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != x.size()) throw Error(ErrorCode::fit_ill_conditioned, "line fit needs >= 2 points");
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::fit_ill_conditioned, "degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

/// Slope of log|y| against log x.
inline LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(std::abs(y[i]) > 0.0))
      throw Error(ErrorCode::fit_ill_conditioned, "log-log fit needs nonzero data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::abs(y[i]));
  }
  return line_fit(lx, ly);
}

}  // namespace willmore_lab
