#include "pom/closed_forms.hpp"

#include <cmath>

namespace pom::closed_form {

namespace {

double gain(const ProtocolConfig& c, double angle) { return std::exp(-c.gamma * angle / c.omega_m); }

// (1 + 2N)(1 - g), the bath share of 2 Var.
double bath(const ProtocolConfig& c, double g) { return (1.0 + 2.0 * c.N_bar) * (1.0 - g); }

}  // namespace

PrecoolVariances precool(const ProtocolConfig& c) {
  const double g = gain(c, kPrecoolAngle);
  const double n = c.n_bar, N = c.N_bar, chi2 = c.chi * c.chi;
  const double vx = (1.0 + 2.0 * N + 2.0 * g * (n - N) + g * chi2) / 2.0;
  const double vp = ((1.0 + 2.0 * N) * (1.0 - g) + g * (1.0 + 2.0 * n) / (1.0 + c.eta() * chi2 * (1.0 + 2.0 * n))) / 2.0;
  return {vx, vp};
}

Mat om_state(const ProtocolConfig& c) {
  const auto [vx, vp] = closed_form::precool(c);
  const double g = gain(c, c.theta);
  const double chi2 = c.chi * c.chi, e2 = std::exp(2.0 * c.r);
  const double ec = c.eta_cav, ed = c.eta_det, eta = c.eta();
  Mat s = Mat::Zero(4, 4);
  s(0, 0) = (1.0 - ed + e2 * ed) / 2.0;
  s(1, 1) = (1.0 - ed + ed * (1.0 + 2.0 * vx * ec * chi2) / e2) / 2.0;
  s(2, 2) = (bath(c, g) + 2.0 * vx * g) / 2.0;
  s(3, 3) = (bath(c, g) + (2.0 * vp + chi2) * g) / 2.0;
  s(0, 3) = s(3, 0) = std::exp(c.r) * std::sqrt(g * eta) * c.chi / 2.0;
  s(1, 2) = s(2, 1) = vx * std::exp(-c.r) * std::sqrt(g * eta) * c.chi;
  return s;
}

Mat interferometric_state(const ProtocolConfig& c) {
  const auto [vx, vp] = closed_form::precool(c);
  const double g1 = gain(c, c.theta), g2 = gain(c, c.phi), g12 = std::sqrt(g1 * g2);
  const double chi2 = c.chi * c.chi, e2 = std::exp(2.0 * c.r);
  const double ec = c.eta_cav, ed = c.eta_det, eta = c.eta();
  const double den = e2 * (1.0 - ed) + ed * (1.0 + 2.0 * vx * ec * chi2);
  const double sq = e2 * eta * chi2 / (1.0 + ed * (e2 - 1.0));
  auto xx = [&](double g) { return (bath(c, g) + 2.0 * vx * g * (1.0 - eta * vx * chi2 / den)) / 2.0; };
  auto pp = [&](double g) { return (bath(c, g) + g * (2.0 * vp + chi2 - 0.5 * sq)) / 2.0; };
  Mat s = Mat::Zero(4, 4);
  s(0, 0) = xx(g1);
  s(1, 1) = pp(g1);
  s(2, 2) = xx(g2);
  s(3, 3) = pp(g2);
  s(0, 2) = s(2, 0) = g12 * eta * vx * vx * chi2 / den;
  s(1, 3) = s(3, 1) = -0.25 * g12 * sq;
  return s;
}

NonJ non_j(double chi, double r, double vx, double ec, double ed) {
  auto E = [r](double k) { return std::exp(k * r); };
  const double x = chi * chi;
  const double ec2 = ec * ec, ec3 = ec2 * ec, ec4 = ec2 * ec2;
  const double ed2 = ed * ed, od = 1.0 - ed;

  const double den = E(8) * od * od + 2.0 * E(6) * ed * od * (1.0 - ec2 + 2.0 * vx * ec3 * x) +
                     E(4) * ed * (ed + ec2 * (2.0 + 4.0 * vx * ec * x - ed * (4.0 - ec2 * (1.0 - 4.0 * vx * ec * x * (1.0 - vx * ec * x))))) +
                     E(2) * ec2 * ed2 * (2.0 - 2.0 * ec2 + 4.0 * vx * ec * x + 8.0 * vx * vx * ec4 * x * x) +
                     ec4 * ed2 * (1.0 + 4.0 * vx * ec * x * (1.0 + vx * ec * x));

  const double na = E(8) * od * od + 2.0 * E(6) * ed * od * (1.0 - ec2 + 2.0 * vx * ec3 * x) +
                    E(4) * ed * (ed + ec2 * (2.0 - (4.0 - ec2) * ed + 2.0 * vx * ec * (1.0 + (1.0 - 2.0 * ec2) * ed) * x + 4.0 * vx * vx * ec4 * ed * x * x)) +
                    E(2) * ec2 * ed2 * (2.0 + ec * (2.0 * vx * x - 2.0 * ec * (1.0 - vx * ec * x * (1.0 + 2.0 * vx * ec * x)))) +
                    ec4 * ed2 * (1.0 + 2.0 * vx * ec * x);

  const double nb = E(8) * od * od + 2.0 * E(6) * ed * od * (1.0 - ec2 + vx * ec3 * x) +
                    E(4) * ed * (ed + ec2 * (2.0 - (4.0 - ec2) * ed + 2.0 * vx * ec * (2.0 - (1.0 + ec2) * ed) * x)) +
                    E(2) * ec2 * ed2 * (2.0 + ec * (4.0 * vx * x - 2.0 * ec * (1.0 + vx * ec * x * (1.0 - 2.0 * vx * ec * x)))) +
                    ec4 * ed2 * (1.0 + 4.0 * vx * ec * x * (1.0 + vx * ec * x));

  const double jc = 4.0 / (E(5) * od + E(3) * ed * (1.0 - ec2 * (1.0 - 2.0 * vx * ec * x)) +
                           E(1) * ec2 * ed * (1.0 + 2.0 * vx * ec * x));
  return {na / den, nb / den, jc};
}

NonJ non_j_factored(double chi, double r, double vx, double ec, double ed) {
  const double q = std::exp(2.0 * r), x = chi * chi, ec2 = ec * ec, ec3 = ec2 * ec;
  const double base = q * q * (1.0 - ed) + q * ed * (1.0 - ec2) + ec2 * ed;
  const double k = 2.0 * vx * ec3 * ed * x;
  const double dm = base + k * (q + 1.0);
  return {(base + q * k) / dm, (base + k) / dm, 4.0 * std::exp(-r) / dm};
}

NonJ non_j_r0(double chi, double vx, double ec, double ed) {
  const double y = vx * ec * ec * ec * ed * chi * chi;
  const double ja = 0.5 * (1.0 + (1.0 + 4.0 * y) / (1.0 + 8.0 * y * (1.0 + 2.0 * y)));
  return {ja, ja, 4.0 / (1.0 + 4.0 * y)};
}

namespace {

Mat non_from_j(const ProtocolConfig& c, const NonJ& j) {
  const auto [vx, vp] = closed_form::precool(c);
  const double g1 = gain(c, c.theta), g2 = gain(c, c.phi), g12 = std::sqrt(g1 * g2);
  const double chi2 = c.chi * c.chi, e2 = std::exp(2.0 * c.r);
  const double ec = c.eta_cav, ed = c.eta_det;
  Mat s = Mat::Zero(4, 4);
  s(0, 0) = (bath(c, g1) + 2.0 * g1 * vx * j.Ja) / 2.0;
  s(1, 1) = (bath(c, g1) + g1 * (2.0 * vp + chi2)) / 2.0;
  s(2, 2) = (bath(c, g2) + 2.0 * g2 * vx * j.Jb) / 2.0;
  s(3, 3) = (bath(c, g2) + g2 * (2.0 * vp + ec * ec * chi2 * (1.0 + ec * (e2 - 1.0)))) / 2.0;
  s(0, 2) = s(2, 0) = -0.5 * e2 * vx * vx * g12 * ec * ec * ec * ed * chi2 * j.Jc;
  s(1, 3) = s(3, 1) = 0.5 * std::exp(c.r) * g12 * ec * ec * chi2;
  return s;
}

}  // namespace

Mat noninterferometric_state(const ProtocolConfig& c) {
  const double vx = closed_form::precool(c).V_x;
  return non_from_j(c, non_j(c.chi, c.r, vx, c.eta_cav, c.eta_det));
}

Mat noninterferometric_state_r0(const ProtocolConfig& c) {
  ProtocolConfig z = c;
  z.r = 0.0;
  const double vx = closed_form::precool(z).V_x;
  return non_from_j(z, non_j_r0(z.chi, vx, z.eta_cav, z.eta_det));
}

}  // namespace pom::closed_form
