#include "plmtest/simgen.hpp"

#include <cmath>
#include <string>

#include "plmtest/error.hpp"

namespace plmtest::simgen {

std::string_view to_string(Model m) noexcept {
  switch (m) {
    case Model::m1: return "M1";
    case Model::m2: return "M2";
    case Model::m3: return "M3";
  }
  return "?";
}

Model parse_model(std::string_view s) {
  if (s == "M1" || s == "m1" || s == "1") return Model::m1;
  if (s == "M2" || s == "m2" || s == "2") return Model::m2;
  if (s == "M3" || s == "m3" || s == "3") return Model::m3;
  throw Error(ErrorCode::config_error, "unknown model '" + std::string(s) + "'");
}

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::s1_null: return "S1";
    case Scenario::s2_sparse: return "S2";
    case Scenario::s3_dense: return "S3";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  if (s == "S1" || s == "s1" || s == "null") return Scenario::s1_null;
  if (s == "S2" || s == "s2" || s == "sparse") return Scenario::s2_sparse;
  if (s == "S3" || s == "s3" || s == "dense") return Scenario::s3_dense;
  throw Error(ErrorCode::config_error, "unknown scenario '" + std::string(s) + "'");
}

double scenario_signal(Scenario s, Index s1) {
  if (s == Scenario::s1_null || s1 == 0) return 0.0;
  const auto k = static_cast<double>(s1);
  if (s == Scenario::s2_sparse) return 1.0 / std::pow(k, 2.0 / 3.0);
  return 1.0 / std::sqrt(k);
}

void validate(const GenConfig& cfg) {
  if (cfg.n_total < 1) throw Error(ErrorCode::too_few_rows, "n_total must be positive");
  if (cfg.p1 < 1 || cfg.p2 < 1) throw Error(ErrorCode::dimension_too_small, "p1 and p2 must be >= 1");
  if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) {
    throw Error(ErrorCode::rho_out_of_range, "rho = " + std::to_string(cfg.rho));
  }
  if (cfg.s1 < 0 || cfg.s1 > cfg.p1) {
    throw Error(ErrorCode::sparsity_exceeds_dimension, "s1 > p1");
  }
  if (cfg.s2 < 0 || cfg.s2 > cfg.p2) {
    throw Error(ErrorCode::sparsity_exceeds_dimension, "s2 > p2");
  }
  if (cfg.model == Model::m3 && cfg.p2 < 6) {
    throw Error(ErrorCode::dimension_too_small, "model M3 needs p2 >= 6");
  }
  if (!(cfg.noise_sd >= 0.0)) throw Error(ErrorCode::config_error, "noise_sd must be >= 0");
}

Matrix toeplitz_chol(double rho, Index p) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::rho_out_of_range, "rho = " + std::to_string(rho));
  }
  if (p < 1) throw Error(ErrorCode::dimension_too_small, "p must be >= 1");
  const double s = std::sqrt(1.0 - rho * rho);
  Matrix l = Matrix::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    double v = (j == 0) ? 1.0 : s;
    for (Index i = j; i < p; ++i) {
      l(i, j) = v;
      v *= rho;
    }
  }
  return l;
}

Covariates sample_covariates(const GenConfig& cfg, Rng& rng) {
  validate(cfg);
  const Index n = cfg.n_total;
  const Index p = cfg.p1 + cfg.p2;
  const double rho = cfg.rho;
  const double s = std::sqrt(1.0 - rho * rho);

  std::normal_distribution<double> std_normal;
  Covariates out{Matrix(n, cfg.p1), Matrix(n, cfg.p2)};
  for (Index i = 0; i < n; ++i) {
    double v = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double e = std_normal(rng);
      v = (j == 0) ? e : rho * v + s * e;
      if (j < cfg.p1) {
        out.x(i, j) = v;
      } else {
        out.z(i, j - cfg.p1) = v;
      }
    }
  }
  return out;
}

double g_eval(Model model, const Eigen::Ref<const Vector>& z_row,
              const Eigen::Ref<const Vector>& gamma) {
  switch (model) {
    case Model::m1: {
      if (gamma.size() != z_row.size()) throw Error(ErrorCode::dimension_mismatch, "gamma length");
      return z_row.dot(gamma) / 3.0;
    }
    case Model::m2: {
      if (gamma.size() != z_row.size()) throw Error(ErrorCode::dimension_mismatch, "gamma length");
      const double u = z_row.dot(gamma);
      return std::cos(u / 2.0) * std::log(std::abs(u) + 1.0);
    }
    case Model::m3: {
      if (z_row.size() < 6) throw Error(ErrorCode::dimension_too_small, "model M3 needs p2 >= 6");
      const double num = z_row(0) + z_row(1) + z_row(2);
      return num / (1.0 + std::exp(z_row(3) + z_row(4) + z_row(5)));
    }
  }
  return 0.0;
}

Vector make_coeffs(Index p, Index s, double c) {
  if (s < 0 || s > p) {
    throw Error(ErrorCode::sparsity_exceeds_dimension,
                "s = " + std::to_string(s) + " > p = " + std::to_string(p));
  }
  Vector b = Vector::Zero(p);
  b.head(s).setConstant(c);
  return b;
}

Dataset generate(const GenConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  auto cov = sample_covariates(cfg, rng);

  const Vector beta = make_coeffs(cfg.p1, cfg.s1, cfg.c1);
  const Vector gamma = make_coeffs(cfg.p2, cfg.s2, cfg.c2);

  Dataset d;
  d.y.resize(cfg.n_total);
  std::normal_distribution<double> std_normal;
  for (Index i = 0; i < cfg.n_total; ++i) {
    const Vector zi = cov.z.row(i).transpose();
    d.y(i) = cov.x.row(i).dot(beta) + g_eval(cfg.model, zi, gamma) +
             cfg.noise_sd * std_normal(rng);
  }
  d.x = std::move(cov.x);
  d.z = std::move(cov.z);
  return d;
}

}  // namespace plmtest::simgen
