#pragma once

// Analytic covariance matrices of the precooled, optical-mechanical and
// two-mechanics states. They are written independently of the numeric
// pipelines and serve as oracles for them.

#include "pom/protocols.hpp"

namespace pom::closed_form {

struct PrecoolVariances {
  double V_x;
  double V_p;
};

// Single precooling pulse.
PrecoolVariances precool(const ProtocolConfig& c);

// Rotating frame, mechanical angle c.theta.
Mat om_state(const ProtocolConfig& c);

// Homodyne angles (0, pi/2); both mechanics at c.theta.
Mat interferometric_state(const ProtocolConfig& c);

struct NonJ {
  double Ja;
  double Jb;
  double Jc;
};

// Polynomial forms in e^{2r}.
NonJ non_j(double chi, double r, double V_x, double eta_cav, double eta_det);
// Factored forms with q = e^{2r}; algebraically equal to non_j.
NonJ non_j_factored(double chi, double r, double V_x, double eta_cav, double eta_det);
// r = 0 forms.
NonJ non_j_r0(double chi, double V_x, double eta_cav, double eta_det);

// Homodyne angle pi/2, mechanics at (c.theta, c.phi).
Mat noninterferometric_state(const ProtocolConfig& c);
Mat noninterferometric_state_r0(const ProtocolConfig& c);

}  // namespace pom::closed_form
