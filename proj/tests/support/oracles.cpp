#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

namespace plmtest::oracle {

double quad_stat(const Vector& r, const Matrix& x) {
  const Index n = r.size();
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (Index l = 0; l < x.cols(); ++l) dot += x(i, l) * x(j, l);
      sum += r(i) * r(j) * dot;
    }
  }
  return sum / static_cast<double>(n);
}

Vector marginal_stats(const Vector& r, const Matrix& x) {
  const Index n = r.size();
  Vector out(x.cols());
  for (Index l = 0; l < x.cols(); ++l) {
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i != j) sum += r(i) * r(j) * x(i, l) * x(j, l);
      }
    }
    out(l) = sum / (static_cast<double>(n) * static_cast<double>(n - 1));
  }
  return out;
}

double trace_sigma2(const Matrix& x) {
  const Index n = x.rows();
  double sum = 0.0;
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      for (Index c = b + 1; c < n; ++c) {
        for (Index d = c + 1; d < n; ++d) {
          double first = 0.0;
          double second = 0.0;
          for (Index l = 0; l < x.cols(); ++l) {
            first += (x(a, l) - x(b, l)) * (x(c, l) - x(d, l));
            second += (x(b, l) - x(c, l)) * (x(d, l) - x(a, l));
          }
          sum += first * second;
        }
      }
    }
  }
  const double nd = static_cast<double>(n);
  const double choose4 = nd * (nd - 1) * (nd - 2) * (nd - 3) / 24.0;
  return sum / (2.0 * choose4);
}

LsFit least_squares(const Matrix& z, const Vector& y) {
  Matrix design(z.rows(), z.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(z.cols()) = z;
  const Vector beta = design.colPivHouseholderQr().solve(y);
  return {beta(0), beta.tail(z.cols())};
}

double lasso_kkt(const Matrix& z, const Vector& y, const Vector& coefficients, double lambda) {
  const Index n = z.rows();
  const double nd = static_cast<double>(n);
  double worst = 0.0;
  const double y_mean = y.mean();
  Vector fitted = Vector::Zero(n);
  Vector center(z.cols());
  Vector scale(z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    center(j) = z.col(j).mean();
    scale(j) = std::sqrt((z.col(j).array() - center(j)).square().sum() / nd);
    fitted += coefficients(j) * (z.col(j).array() - center(j)).matrix();
  }
  const Vector resid = (y.array() - y_mean).matrix() - fitted;
  for (Index j = 0; j < z.cols(); ++j) {
    if (scale(j) == 0.0) continue;
    const double g = ((z.col(j).array() - center(j)) / scale(j)).matrix().dot(resid) / nd;
    const double b = coefficients(j) * scale(j);
    const double v = b != 0.0 ? std::abs(g - lambda * (b > 0 ? 1.0 : -1.0))
                              : std::max(0.0, std::abs(g) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace plmtest::oracle
