#include "pom/protocols.hpp"

#include <cmath>

namespace pom {

Protocol parse_protocol(const std::string& name) {
  if (name == "om" || name == "optomechanical") return Protocol::om;
  if (name == "int" || name == "interferometric") return Protocol::interferometric;
  if (name == "non" || name == "noninterferometric" || name == "non-interferometric")
    return Protocol::noninterferometric;
  throw InvalidArgument("unknown protocol '" + name + "' (expected om, int or non)");
}

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::om: return "om";
    case Protocol::interferometric: return "int";
    case Protocol::noninterferometric: return "non";
  }
  return "?";
}

void ProtocolConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(omega_m > 0.0) || !finite(omega_m)) throw InvalidArgument("config: omega_m must be > 0");
  if (!(gamma >= 0.0) || !finite(gamma)) throw InvalidArgument("config: gamma must be >= 0");
  if (!(n_bar >= 0.0) || !finite(n_bar)) throw InvalidArgument("config: n_bar must be >= 0");
  if (!(N_bar >= 0.0) || !finite(N_bar)) throw InvalidArgument("config: N_bar must be >= 0");
  if (!(eta_cav > 0.0 && eta_cav <= 1.0)) throw InvalidArgument("config: eta_cav must lie in (0,1]");
  if (!(eta_det > 0.0 && eta_det <= 1.0)) throw InvalidArgument("config: eta_det must lie in (0,1]");
  if (eta_ver && !(*eta_ver > 0.0 && *eta_ver <= 1.0)) throw InvalidArgument("config: eta_ver must lie in (0,1]");
  if (!finite(chi)) throw InvalidArgument("config: chi must be finite");
  if (!finite(r)) throw InvalidArgument("config: r must be finite");
  if (precool_pulses < 0) throw InvalidArgument("config: precool_pulses must be >= 0");
  if (!(theta >= 0.0) || !finite(theta)) throw InvalidArgument("config: theta must be >= 0");
  if (!(phi >= 0.0) || !finite(phi)) throw InvalidArgument("config: phi must be >= 0");
  if (!finite(lambda_kick)) throw InvalidArgument("config: lambda_kick must be finite");
  if (!finite(homodyne_angles.first) || !finite(homodyne_angles.second) || !finite(homodyne_angle))
    throw InvalidArgument("config: homodyne angles must be finite");
}

namespace {

GaussianState decohere(const GaussianState& s, int mode, double theta, const ProtocolConfig& c) {
  return apply_channel(s, mechanical_decoherence(c.gamma, c.N_bar, c.omega_m, theta, mode, s.n_modes));
}

GaussianState lose(const GaussianState& s, int mode, double eta) {
  return apply_channel(s, optical_loss(eta, mode, s.n_modes));
}

GaussianState squeeze(const GaussianState& s, int mode, double r) { return apply_local(s, make_squeezer(r), {mode}); }

GaussianState interact(const GaussianState& s, double chi, int light, int mech) {
  return apply_symplectic(s, make_pulsed_om(chi, light, mech, s.n_modes));
}

// Homodyne with the outcome at its prior mean, so conditioning leaves the
// means untouched and only the covariance is updated.
GaussianState measure_at_mean(const GaussianState& s, int mode, double angle) {
  HomodyneMeasurement m;
  m.mode = mode;
  m.angle = angle;
  m.outcome = std::cos(angle) * s.mean(2 * mode) + std::sin(angle) * s.mean(2 * mode + 1);
  return homodyne_update(s, m);
}

GaussianState kick(GaussianState s, int mech_mode, double lambda) {
  s.mean(2 * mech_mode + 1) += lambda;
  return s;
}

GaussianState finish_mechanics(GaussianState s, const std::vector<double>& angles, const ProtocolConfig& c) {
  for (std::size_t k = 0; k < angles.size(); ++k) {
    s = decohere(s, static_cast<int>(k), angles[k], c);
    if (c.lab_frame) s = apply_local(s, make_rotation(angles[k]), {static_cast<int>(k)});
  }
  return s;
}

}  // namespace

PrecooledState precool(const ProtocolConfig& config) {
  config.validate();
  GaussianState mech = thermal(config.n_bar);
  for (int k = 0; k < config.precool_pulses; ++k) {
    if (k > 0) mech = decohere(mech, 0, kPrecoolAngle, config);
    GaussianState s = tensor(vacuum(1), mech);
    s = interact(s, config.chi, 0, 1);
    s = lose(s, 0, config.eta());
    mech = measure_at_mean(s, 0, kPi / 2);
  }
  if (config.precool_pulses > 0) {
    mech = apply_local(mech, make_rotation(kPrecoolAngle), {0});
    mech = decohere(mech, 0, kPrecoolAngle, config);
  }
  PrecooledState out;
  out.state = mech;
  out.V_x = mech.cov(0, 0);
  out.V_p = mech.cov(1, 1);
  return out;
}

GaussianState om_entangle_from(const ProtocolConfig& config, const Mat& mech_cov, OmOrdering ordering) {
  config.validate();
  if (mech_cov.rows() != 2 || mech_cov.cols() != 2) throw InvalidArgument("om_entangle_from: expected 2x2 mechanics");
  GaussianState mech{1, Vec::Zero(2), mech_cov};
  GaussianState s = tensor(vacuum(1), mech);
  s = interact(s, config.chi, 0, 1);
  if (ordering == OmOrdering::loss_then_squeeze) {
    s = lose(s, 0, config.eta_cav);
    s = squeeze(s, 0, config.r);
    s = lose(s, 0, config.eta_det);
  } else {
    s = squeeze(s, 0, config.r);
    s = lose(s, 0, config.eta());
  }
  s = kick(s, 1, config.lambda_kick);
  s = decohere(s, 1, config.theta, config);
  if (config.lab_frame) s = apply_local(s, make_rotation(config.theta), {1});
  return s;
}

GaussianState om_entangle(const ProtocolConfig& config) {
  return om_entangle_from(config, precool(config).state.cov, OmOrdering::loss_then_squeeze);
}

GaussianState interferometric_entangle(const ProtocolConfig& config) {
  config.validate();
  const GaussianState mech = precool(config).state;
  // L1, L2, M1, M2
  GaussianState s = tensor(tensor(vacuum(2), mech), mech);
  const SymplecticOp bs = make_beamsplitter(kPi / 4, 0.0);
  s = apply_local(s, bs, {0, 1});
  s = interact(s, config.chi, 0, 2);
  s = interact(s, config.chi, 1, 3);
  for (int l = 0; l < 2; ++l) {
    s = lose(s, l, config.eta_cav);
    s = squeeze(s, l, config.r);
    s = lose(s, l, config.eta_det);
  }
  s = apply_local(s, bs, {0, 1});
  s = measure_at_mean(s, 0, config.homodyne_angles.first);
  s = measure_at_mean(s, 0, config.homodyne_angles.second);
  s = kick(kick(s, 0, config.lambda_kick), 1, config.lambda_kick);
  return finish_mechanics(s, {config.theta, config.phi}, config);
}

namespace {

// L, M1, M2 up to the last squeezer, both squeezers set to r.
GaussianState noninterferometric_before_detection(const ProtocolConfig& config, double r) {
  const GaussianState mech = precool(config).state;
  GaussianState s = tensor(tensor(vacuum(1), mech), mech);
  s = interact(s, config.chi, 0, 1);
  s = lose(s, 0, config.eta_cav);
  s = squeeze(s, 0, r);
  s = lose(s, 0, config.eta_cav);
  s = interact(s, config.eta_cav * config.chi, 0, 2);
  s = lose(s, 0, config.eta_cav);
  s = squeeze(s, 0, r);
  return s;
}

}  // namespace

GaussianState noninterferometric_entangle(const ProtocolConfig& config) {
  config.validate();
  GaussianState s = noninterferometric_before_detection(config, config.r);
  s = lose(s, 0, config.eta_det);
  s = measure_at_mean(s, 0, config.homodyne_angle);
  s = kick(kick(s, 0, config.lambda_kick), 1, config.lambda_kick);
  return finish_mechanics(s, {config.theta, config.phi}, config);
}

GaussianState entangle(Protocol p, const ProtocolConfig& config) {
  switch (p) {
    case Protocol::om: return om_entangle(config);
    case Protocol::interferometric: return interferometric_entangle(config);
    case Protocol::noninterferometric: return noninterferometric_entangle(config);
  }
  throw InvalidArgument("entangle: unknown protocol");
}

GaussianState entangle_at(Protocol p, ProtocolConfig config, double theta, double phi) {
  config.theta = theta;
  config.phi = phi;
  return entangle(p, config);
}

double symmetrizing_squeezing(Protocol p, const ProtocolConfig& config) {
  config.validate();
  if (p != Protocol::noninterferometric) {
    const double vx = precool(config).V_x;
    const double chi2 = config.chi * config.chi;
    return 0.25 * std::log(1.0 - config.eta_cav + config.eta_cav * (1.0 + 2.0 * vx * chi2));
  }
  auto asym = [&](double r) {
    const GaussianState s = noninterferometric_before_detection(config, r);
    return s.cov(0, 0) - s.cov(1, 1);
  };
  double lo = 0.0, hi = 5.0;
  double flo = asym(lo);
  if (std::abs(flo) < 1e-14) return 0.0;
  const double fhi = asym(hi);
  if ((flo < 0.0) == (fhi < 0.0)) throw RootNotFound("symmetrizing_squeezing: no sign change on [0, 5]");
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double fm = asym(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace pom
