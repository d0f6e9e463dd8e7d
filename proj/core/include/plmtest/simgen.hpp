#pragma once

#include <cstdint>
#include <string_view>

#include "plmtest/dataset.hpp"

namespace plmtest::simgen {

// Nuisance function families.
//   M1: g(z) = z'gamma / 3
//   M2: g(z) = cos(z'gamma / 2) * log(|z'gamma| + 1)
//   M3: g(z) = (z1 + z2 + z3) / (1 + exp(z4 + z5 + z6))   (gamma unused)
enum class Model { m1, m2, m3 };

std::string_view to_string(Model m) noexcept;
Model parse_model(std::string_view s);

// Coefficient scenarios for beta: null, sparse (c1 = s1^(-2/3)) and dense
// (c1 = 1/sqrt(s1), so ||beta||_2 = 1).
enum class Scenario { s1_null, s2_sparse, s3_dense };

std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view s);

// Signal value c1 implied by a scenario at sparsity s1 (0 for the null).
double scenario_signal(Scenario s, Index s1);

struct GenConfig {
  Index n_total = 200;
  Index p1 = 500;
  Index p2 = 500;
  double rho = 0.5;
  Model model = Model::m1;
  Index s1 = 0;
  double c1 = 0.0;
  Index s2 = 20;
  double c2 = 0.5;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

// Throws on s1 > p1, s2 > p2, rho outside [0, 1), M3 with p2 < 6, or n_total < 1.
void validate(const GenConfig& cfg);

// Lower-triangular L with L L' = Sigma, Sigma_ij = rho^|i-j|. The Toeplitz
// matrix here is an AR(1) covariance, so the factor has a closed form:
// L_i0 = rho^i and L_ij = rho^(i-j) sqrt(1 - rho^2) for 1 <= j <= i.
Matrix toeplitz_chol(double rho, Index p);

// Rows i.i.d. N(0, Sigma) over p1 + p2 coordinates; the first p1 go to x.
// Each row is L e for a fresh standard normal e, applied through the AR(1)
// recursion that L encodes (O(p) per row instead of O(p^2)).
struct Covariates {
  Matrix x;
  Matrix z;
};
Covariates sample_covariates(const GenConfig& cfg, Rng& rng);

double g_eval(Model model, const Eigen::Ref<const Vector>& z_row,
              const Eigen::Ref<const Vector>& gamma);

// First s entries equal c, the rest zero.
Vector make_coeffs(Index p, Index s, double c);

// y = x beta + g(z) + noise_sd * eps, deterministic in cfg.seed.
Dataset generate(const GenConfig& cfg);

}  // namespace plmtest::simgen
