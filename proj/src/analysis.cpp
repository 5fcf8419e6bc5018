#include "pom/analysis.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace pom {

double Axis::at(int k) const {
  if (steps <= 1) return min;
  return min + (max - min) * static_cast<double>(k) / static_cast<double>(steps - 1);
}

void Axis::validate() const {
  if (steps < 1) throw InvalidArgument("axis '" + name + "': steps must be >= 1");
  if (!std::isfinite(min) || !std::isfinite(max)) throw InvalidArgument("axis '" + name + "': bounds must be finite");
  if (max < min) throw InvalidArgument("axis '" + name + "': max < min");
}

double ScanGrid::value(int i, int j) const {
  const int inner = axes.size() > 1 ? axes[1].steps : 1;
  return values.at(static_cast<std::size_t>(i) * inner + j);
}

std::size_t ScanGrid::argmax() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  return best;
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

// Maximises f on [a, b]; returns the abscissa.
double golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

struct GridMax {
  double x;
  double value;
};

// Grid of n points on [lo, hi], then golden section on the best bracket.
// Ties go to the smallest abscissa.
GridMax grid_then_golden(const std::function<double(double)>& f, double lo, double hi, int n, double tol) {
  std::vector<double> xs(n), fs(n);
  int best = 0;
  for (int k = 0; k < n; ++k) {
    xs[k] = lo + (hi - lo) * k / (n - 1);
    fs[k] = f(xs[k]);
    if (fs[k] > fs[best]) best = k;
  }
  const double a = xs[std::max(best - 1, 0)], b = xs[std::min(best + 1, n - 1)];
  const double x = golden_max(f, a, b, tol);
  const double fx = f(x);
  if (fx > fs[best]) return {x, fx};
  return {xs[best], fs[best]};
}

// Margin clears the rounding noise of nearly separable states at tiny chi.
bool entangled(double nu_minus) { return nu_minus < 0.5 * (1.0 - 1e-9); }

}  // namespace

double state_log_neg(Protocol p, const ProtocolConfig& config) {
  return log_negativity(entangle(p, config).cov).log_neg;
}

ROptimum optimize_r(Protocol p, double chi, const ProtocolConfig& config) {
  if (!(chi >= 0.0)) throw InvalidArgument("optimize_r: chi must be >= 0");
  ProtocolConfig c = config;
  c.chi = chi;
  auto f = [&](double r) {
    c.r = r;
    return state_log_neg(p, c);
  };
  const GridMax g = grid_then_golden(f, 0.0, 3.0, 61, 1e-4);
  if (!(g.value > 0.0)) return {0.0, 0.0};
  return {g.x, g.value};
}

ChiROptimum optimize_chi_r(Protocol p, const ProtocolConfig& config, double chi_lo, double chi_hi, bool fix_r) {
  if (!(chi_lo >= 0.0) || !(chi_hi > chi_lo)) throw InvalidArgument("optimize_chi_r: need 0 <= chi_lo < chi_hi");
  auto profile = [&](double chi) {
    if (!fix_r) return optimize_r(p, chi, config).log_neg;
    ProtocolConfig c = config;
    c.chi = chi;
    return state_log_neg(p, c);
  };
  const GridMax g = grid_then_golden(profile, chi_lo, chi_hi, 61, 1e-4);
  ChiROptimum out;
  out.chi = g.x;
  if (fix_r) {
    out.r = config.r;
    out.log_neg = g.value;
  } else {
    const ROptimum ro = optimize_r(p, g.x, config);
    out.r = ro.r;
    out.log_neg = ro.log_neg;
  }
  return out;
}

ScanGrid scan_chi_r(Protocol p, const ProtocolConfig& config, const Axis& chi_axis, const Axis& r_axis,
                    bool with_curves) {
  chi_axis.validate();
  r_axis.validate();
  ScanGrid g;
  g.axes = {chi_axis, r_axis};
  g.values.reserve(static_cast<std::size_t>(chi_axis.steps) * r_axis.steps);
  ProtocolConfig c = config;
  for (int i = 0; i < chi_axis.steps; ++i) {
    c.chi = chi_axis.at(i);
    for (int j = 0; j < r_axis.steps; ++j) {
      c.r = r_axis.at(j);
      g.values.push_back(state_log_neg(p, c));
    }
    if (with_curves) {
      double rs = std::numeric_limits<double>::quiet_NaN();
      try {
        rs = symmetrizing_squeezing(p, c);
      } catch (const RootNotFound&) {
      }
      g.r_sym.push_back(rs);
      const ROptimum ro = optimize_r(p, c.chi, config);
      g.r_opt.push_back(ro.r);
      g.en_opt.push_back(ro.log_neg);
    }
  }
  return g;
}

ScanGrid scan_angles(Protocol p, const ProtocolConfig& config, const Axis& phi_axis,
                     const std::optional<Axis>& psi_axis) {
  phi_axis.validate();
  ScanGrid g;
  ProtocolConfig c = config;
  if (p == Protocol::interferometric) {
    if (!psi_axis) throw InvalidArgument("scan_angles: interferometric scheme needs two angle axes");
    psi_axis->validate();
    g.axes = {phi_axis, *psi_axis};
    for (int i = 0; i < phi_axis.steps; ++i)
      for (int j = 0; j < psi_axis->steps; ++j) {
        c.homodyne_angles = {phi_axis.at(i), psi_axis->at(j)};
        g.values.push_back(state_log_neg(p, c));
      }
  } else if (p == Protocol::noninterferometric) {
    if (psi_axis) throw InvalidArgument("scan_angles: non-interferometric scheme takes a single angle axis");
    g.axes = {phi_axis};
    for (int i = 0; i < phi_axis.steps; ++i) {
      c.homodyne_angle = phi_axis.at(i);
      g.values.push_back(state_log_neg(p, c));
    }
  } else {
    throw InvalidArgument("scan_angles: the optical-mechanical scheme has no homodyne angle to scan");
  }
  return g;
}

double min_nu_over_chi(Protocol p, const ProtocolConfig& config, EtaTarget target) {
  ProtocolConfig c = config;
  auto nu = [&](double log_chi) {
    c.chi = std::pow(10.0, log_chi);
    if (target == EtaTarget::generate) return log_negativity(entangle(p, c).cov).nu_minus;
    return log_negativity(build_sigma_ver(p, c, EstimationMode::conservative_time).sigma_ver, false).nu_minus;
  };
  constexpr int n = 200;
  const double lo = -2.0, hi = 2.0;
  int best = 0;
  double best_nu = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double v = nu(lo + (hi - lo) * k / (n - 1));
    if (v < best_nu) {
      best_nu = v;
      best = k;
    }
    if (entangled(v)) return v;
  }
  const double a = lo + (hi - lo) * std::max(best - 1, 0) / (n - 1);
  const double b = lo + (hi - lo) * std::min(best + 1, n - 1) / (n - 1);
  const double x = golden_max([&](double lc) { return -nu(lc); }, a, b, 1e-6);
  return std::min(best_nu, nu(x));
}

EtaMin min_eta_cav(Protocol p, const ProtocolConfig& config, double theta, EtaTarget target) {
  ProtocolConfig c = config;
  c.r = 0.0;
  c.theta = theta;
  c.phi = theta;
  auto indicator = [&](double eta) {
    c.eta_cav = eta;
    return entangled(min_nu_over_chi(p, c, target));
  };
  EtaMin out;
  double lo = 1e-6, hi = 1.0;
  if (indicator(lo)) {
    out.zero_limit = true;
    out.eta_min = 0.0;
    return out;
  }
  if (!indicator(hi)) {
    out.unreachable = true;
    out.eta_min = 1.0;
    return out;
  }
  // Absolute 1e-4, tightened for the small entries.
  while (hi - lo > std::min(1e-4, 1e-3 * hi)) {
    const double mid = 0.5 * (lo + hi);
    if (indicator(mid))
      hi = mid;
    else
      lo = mid;
  }
  out.eta_min = 0.5 * (lo + hi);
  return out;
}

double total_optical_efficiency(Protocol p, double eta_cav, double eta_det) {
  if (!(eta_cav > 0.0 && eta_cav <= 1.0) || !(eta_det > 0.0 && eta_det <= 1.0))
    throw InvalidArgument("total_optical_efficiency: efficiencies must lie in (0,1]");
  if (p == Protocol::noninterferometric) return eta_cav * eta_cav * eta_cav * eta_det;
  return eta_cav * eta_det;
}

LargeChiBound large_chi_bound(const ProtocolConfig& config) {
  config.validate();
  // Written in u = 1 - E, E = e^{-gamma t}; the expanded polynomials in E
  // cancel to about 1e-7 relative near E = 1.
  const double u = -std::expm1(-config.gamma * config.theta / config.omega_m), E = 1.0 - u;
  const double eta = config.eta(), N = config.N_bar;
  LargeChiBound b;
  b.f1 = N * (1.0 + N) * u * u * u * (u - 1.0 - eta);
  b.f2 = u * (u * u - (2.0 + eta) * u + 1.0 + eta);
  b.f3 = u * u * (1.0 + eta - u);
  b.f_value = 2.0 * (b.f1 + b.f2) / (E * (1.0 + 2.0 * N) * b.f3);
  b.c_opt = (1.0 + 2.0 * N) * u / (1.0 + E);
  b.infeasible = !(b.f_value > 0.0);
  return b;
}

GaussianState large_chi_state(const ProtocolConfig& config, double chi, double V_P, SqueezingAnsatz ansatz) {
  ProtocolConfig c = config;
  c.chi = chi;
  const double x = std::log1p(large_chi_bound(c).c_opt * chi * chi);
  c.r = ansatz == SqueezingAnsatz::exp2r ? 0.5 * x : x;
  const double vx = precool(c).V_x;
  Mat mech = Mat::Zero(2, 2);
  mech(0, 0) = vx;
  mech(1, 1) = V_P;
  return om_entangle_from(c, mech, OmOrdering::squeeze_then_loss);
}

double large_chi_lambda(const ProtocolConfig& config, double chi, double V_P, SqueezingAnsatz ansatz) {
  return ppt_lambda(large_chi_state(config, chi, V_P, ansatz).cov);
}

}  // namespace pom
