#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pom/verification.hpp"

namespace pom {

// Inclusive, evenly spaced axis; steps = 1 means just min.
struct Axis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  double at(int k) const;
  void validate() const;
};

struct ScanGrid {
  std::vector<Axis> axes;
  std::vector<double> values;  // row-major over axes, first axis slowest

  // Filled by scan_chi_r, one entry per chi.
  std::vector<double> r_sym;
  std::vector<double> r_opt;
  std::vector<double> en_opt;

  double value(int i, int j = 0) const;
  std::size_t argmax() const;
};

// E_N of the generated state (bits).
double state_log_neg(Protocol p, const ProtocolConfig& config);

struct ROptimum {
  double r = 0.0;
  double log_neg = 0.0;
};

ROptimum optimize_r(Protocol p, double chi, const ProtocolConfig& config);

struct ChiROptimum {
  double chi = 0.0;
  double r = 0.0;
  double log_neg = 0.0;
};

// Joint maximum over chi in [chi_lo, chi_hi]: chi grid of 61 points, then
// golden section on the best bracket. With fix_r the squeezing stays at config.r.
ChiROptimum optimize_chi_r(Protocol p, const ProtocolConfig& config, double chi_lo, double chi_hi, bool fix_r);

ScanGrid scan_chi_r(Protocol p, const ProtocolConfig& config, const Axis& chi_axis, const Axis& r_axis,
                    bool with_curves = true);

// Generation-stage homodyne angles scanned. Interferometric needs psi_axis,
// non-interferometric must not have one.
ScanGrid scan_angles(Protocol p, const ProtocolConfig& config, const Axis& phi_axis,
                     const std::optional<Axis>& psi_axis);

enum class EtaTarget { generate, verify };

struct EtaMin {
  double eta_min = 0.0;
  bool zero_limit = false;   // entangled as eta_cav -> 0+, reported as ">0"
  bool unreachable = false;  // not entangled even at eta_cav = 1
};

// Best nu_minus over chi at fixed config (r forced to 0 by the caller).
double min_nu_over_chi(Protocol p, const ProtocolConfig& config, EtaTarget target);

EtaMin min_eta_cav(Protocol p, const ProtocolConfig& config, double theta, EtaTarget target);

double total_optical_efficiency(Protocol p, double eta_cav, double eta_det);

struct LargeChiBound {
  double f_value = 0.0;
  double c_opt = 0.0;
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  bool infeasible = false;
};

// Uses the decoherence angle config.theta and eta = eta_cav * eta_det.
LargeChiBound large_chi_bound(const ProtocolConfig& config);

enum class SqueezingAnsatz {
  exp2r,  // e^{2r} = 1 + c_opt chi^2
  exp_r,  // r = ln(1 + c_opt chi^2), read literally
};

// OM state with the squeezer ahead of the combined loss, precooled V_x at
// the same chi and the supplied V_P.
GaussianState large_chi_state(const ProtocolConfig& config, double chi, double V_P, SqueezingAnsatz ansatz);
double large_chi_lambda(const ProtocolConfig& config, double chi, double V_P, SqueezingAnsatz ansatz);

}  // namespace pom
