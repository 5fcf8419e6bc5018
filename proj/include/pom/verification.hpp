#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pom/protocols.hpp"

namespace pom {

enum class EstimationMode { plain, conservative_time, conservative_time_noise };

EstimationMode parse_mode(const std::string& name);  // "plain", "time", "time_noise"
std::string mode_name(EstimationMode m);

// Idealised, lossless description of one sigma_ver element:
//   value = offset + sum_k coef_k * u_k^T sigma(angles_k) v_k,
// where sigma(angles) is sigma(0) with each mechanical mode decohered through
// its own phase-space angle. u, v act on the 4 quadratures of sigma(0).
struct RecipeTerm {
  double coef = 1.0;
  Eigen::Vector4d u = Eigen::Vector4d::Zero();
  Eigen::Vector4d v = Eigen::Vector4d::Zero();
  std::array<double, 2> angles{0.0, 0.0};
};

struct ElementRecipe {
  int i = 0, j = 0;  // i <= j
  std::vector<RecipeTerm> terms;
  double offset = 0.0;
};

struct VerifiedCovariance {
  Mat sigma_ver;
  Protocol protocol = Protocol::om;
  EstimationMode mode = EstimationMode::conservative_time;
  double chi = 0.0;
  double eta_ver = 1.0;
  std::array<bool, 2> mechanical{false, true};  // modes subject to decoherence
  std::vector<ElementRecipe> recipes;           // upper triangle, row-major

  const ElementRecipe& recipe(int i, int j) const;
  // Distinct mechanical angles entering element (i, j), ascending.
  std::vector<double> element_angles(int i, int j) const;
};

// Deterministic reconstruction from exact readout variances.
VerifiedCovariance build_sigma_ver(Protocol p, const ProtocolConfig& config, EstimationMode mode);

// Same readout model applied to a supplied sigma(0) (4x4) and mean.
VerifiedCovariance build_sigma_ver_from(Protocol p, const ProtocolConfig& config, EstimationMode mode,
                                        const Mat& sigma0, const Vec& mean0);

// Evaluates the idealised recipes on a given sigma(0) under the given
// decoherence parameters.
Mat evaluate_recipes(const VerifiedCovariance& ver, const Mat& sigma0, double gamma, double N_bar, double omega_m);

struct InverseMapResult {
  Mat sigma_zero_est;
  std::optional<double> residual;
};

// Undoes the decoherence element by element: one-time elements first, then
// the elements that mix several times using the already-recovered ones.
InverseMapResult inverse_map(const VerifiedCovariance& ver, double gamma, double N_bar, double omega_m,
                             const Mat* truth = nullptr);

struct MonteCarloResult {
  VerifiedCovariance ver;
  Mat standard_errors;
};

MonteCarloResult monte_carlo_sigma_ver(Protocol p, const ProtocolConfig& config, EstimationMode mode,
                                       std::int64_t n_samples, std::uint64_t seed);

}  // namespace pom
