#pragma once

#include <optional>
#include <string>
#include <utility>

#include "pom/gaussian.hpp"

namespace pom {

enum class Protocol { om, interferometric, noninterferometric };

Protocol parse_protocol(const std::string& name);  // "om", "int", "non" and long forms
std::string protocol_name(Protocol p);

struct ProtocolConfig {
  double omega_m = 2.0 * kPi * 4e6;
  double gamma = 2.0 * kPi * 100.0;
  double n_bar = 500.0;
  double N_bar = 500.0;
  double eta_cav = 0.9;
  double eta_det = 0.95;
  // Reference values only; chi is the operative input.
  double kappa = 2.0 * kPi * 20e9;
  double g0 = 2.0 * kPi * 30e6;

  double chi = 3.0;
  double r = 0.0;
  int precool_pulses = 1;
  double theta = kPi / 2;
  double phi = kPi / 2;
  double lambda_kick = 0.0;
  std::pair<double, double> homodyne_angles{0.0, kPi / 2};  // interferometric (phi, psi)
  double homodyne_angle = kPi / 2;                          // non-interferometric
  std::optional<double> eta_ver;                            // defaults to eta_cav * eta_det
  bool lab_frame = false;

  void validate() const;
  double eta() const { return eta_cav * eta_det; }
  double verification_eta() const { return eta_ver ? *eta_ver : eta(); }
};

struct PrecooledState {
  double V_x = 0.0;
  double V_p = 0.0;
  GaussianState state;
};

// Quarter-period free evolution between precooling and entangling pulses.
constexpr double kPrecoolAngle = kPi / 2;

PrecooledState precool(const ProtocolConfig& config);

// Light (mode 0) and mechanics (mode 1).
GaussianState om_entangle(const ProtocolConfig& config);

enum class OmOrdering {
  loss_then_squeeze,  // S_om, cavity loss, squeezer, detection loss
  squeeze_then_loss,  // S_om, squeezer, one combined loss eta_cav*eta_det
};

// OM map on a supplied precooled mechanical covariance.
GaussianState om_entangle_from(const ProtocolConfig& config, const Mat& mech_cov, OmOrdering ordering);

// Both return mech1 (mode 0) and mech2 (mode 1).
GaussianState interferometric_entangle(const ProtocolConfig& config);
GaussianState noninterferometric_entangle(const ProtocolConfig& config);

GaussianState entangle(Protocol p, const ProtocolConfig& config);
// Same protocol with the post-generation angles set to (theta, phi).
GaussianState entangle_at(Protocol p, ProtocolConfig config, double theta, double phi);

// Squeezing that equalises Var(X_L) and Var(P_L) ahead of the detector.
double symmetrizing_squeezing(Protocol p, const ProtocolConfig& config);

}  // namespace pom
