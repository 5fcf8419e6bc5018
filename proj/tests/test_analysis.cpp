#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pom/analysis.hpp"

using namespace pom;

namespace {

double en(Protocol p, double chi, double r, double theta = kPi / 2) {
  ProtocolConfig c;
  c.chi = chi;
  c.r = r;
  c.theta = c.phi = theta;
  return state_log_neg(p, c);
}

}  // namespace

TEST_CASE("axes") {
  const Axis a{"chi", 0.0, 6.0, 121};
  CHECK(a.at(0) == 0.0);
  CHECK(a.at(120) == 6.0);
  CHECK(a.at(62) == doctest::Approx(3.1));
  CHECK_THROWS_AS((Axis{"x", 0, 1, 0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((Axis{"x", 1, 0, 3}.validate()), InvalidArgument);
}

TEST_CASE("optimal squeezing") {
  const ProtocolConfig c;
  const ROptimum om = optimize_r(Protocol::om, 3.12, c);
  CHECK(om.r == doctest::Approx(0.60).epsilon(0.03 / 0.60));
  CHECK(om.log_neg == doctest::Approx(2.12).epsilon(0.02 / 2.12));
  const ROptimum non = optimize_r(Protocol::noninterferometric, 2.97, c);
  CHECK(non.r == doctest::Approx(0.15).epsilon(0.03 / 0.15));
  const ROptimum zero = optimize_r(Protocol::om, 0.0, c);
  CHECK(zero.r == 0.0);
  CHECK(zero.log_neg == 0.0);
  CHECK_THROWS_AS(optimize_r(Protocol::om, -1.0, c), InvalidArgument);

  // Local maximum.
  for (Protocol p : {Protocol::om, Protocol::interferometric, Protocol::noninterferometric}) {
    const ROptimum o = optimize_r(p, 3.0, c);
    CHECK(en(p, 3.0, o.r + 1e-3) <= o.log_neg + 1e-9);
    if (o.r >= 1e-3) CHECK(en(p, 3.0, o.r - 1e-3) <= o.log_neg + 1e-9);
  }
}

TEST_CASE("chi-r scan") {
  const ProtocolConfig c;
  const Axis chi{"chi", 2.8, 3.4, 13}, r{"r", 0.4, 0.8, 21};
  const ScanGrid g = scan_chi_r(Protocol::om, c, chi, r);
  CHECK(g.values.size() == 13u * 21u);
  for (double v : g.values) CHECK(v >= 0.0);
  const std::size_t k = g.argmax();
  CHECK(g.values[k] == doctest::Approx(2.12).epsilon(0.02 / 2.12));
  CHECK(g.value(static_cast<int>(k) / 21, static_cast<int>(k) % 21) == g.values[k]);
  REQUIRE(g.r_sym.size() == 13u);
  for (int i = 0; i < 13; ++i) CHECK(g.r_sym[i] > g.r_opt[i]);
}

TEST_CASE("r_sym exceeds r_opt across the optical-mechanical grid") {
  const ProtocolConfig c;
  const ScanGrid g = scan_chi_r(Protocol::om, c, Axis{"chi", 0.5, 6.0, 12}, Axis{"r", 0.0, 0.0, 1});
  for (std::size_t i = 0; i < g.r_sym.size(); ++i) CHECK(g.r_sym[i] > g.r_opt[i]);
}

TEST_CASE("angle scans") {
  ProtocolConfig c;
  c.chi = 2.97;
  const Axis phi{"phi", 0.0, kPi, 9};
  const ScanGrid g = scan_angles(Protocol::interferometric, c, phi, phi);
  for (int i = 0; i < 9; ++i) CHECK(g.value(i, i) < 1e-10);
  CHECK(g.value(0, 4) == doctest::Approx(0.98).epsilon(0.02 / 0.98));
  CHECK(g.value(4, 0) == doctest::Approx(g.value(0, 4)).epsilon(1e-10));
  const ScanGrid n = scan_angles(Protocol::noninterferometric, c, phi, std::nullopt);
  CHECK(n.values.size() == 9u);
  CHECK_THROWS_AS(scan_angles(Protocol::interferometric, c, phi, std::nullopt), InvalidArgument);
  CHECK_THROWS_AS(scan_angles(Protocol::noninterferometric, c, phi, phi), InvalidArgument);
  CHECK_THROWS_AS(scan_angles(Protocol::om, c, phi, std::nullopt), InvalidArgument);
}

TEST_CASE("total optical efficiency") {
  CHECK(total_optical_efficiency(Protocol::interferometric, 0.53, 0.95) == doctest::Approx(0.50).epsilon(0.02));
  CHECK(total_optical_efficiency(Protocol::noninterferometric, 0.48, 0.95) == doctest::Approx(0.105).epsilon(0.01));
  CHECK(total_optical_efficiency(Protocol::om, 1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(total_optical_efficiency(Protocol::om, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("minimum cavity efficiency") {
  const ProtocolConfig c;
  const EtaMin om0 = min_eta_cav(Protocol::om, c, 0.0, EtaTarget::generate);
  CHECK(om0.zero_limit);
  CHECK(om0.eta_min == 0.0);
  const EtaMin om2 = min_eta_cav(Protocol::om, c, 2 * kPi, EtaTarget::generate);
  CHECK(om2.eta_min == doctest::Approx(0.0065).epsilon(0.15));
  const EtaMin in = min_eta_cav(Protocol::interferometric, c, kPi / 2, EtaTarget::generate);
  CHECK(std::abs(in.eta_min - 0.59) < 0.01);
  const EtaMin nv = min_eta_cav(Protocol::noninterferometric, c, 0.0, EtaTarget::verify);
  CHECK(std::abs(nv.eta_min - 0.55) < 0.01);

  for (Protocol p : {Protocol::om, Protocol::interferometric, Protocol::noninterferometric}) {
    const double a = min_eta_cav(p, c, 0.0, EtaTarget::generate).eta_min;
    const double b = min_eta_cav(p, c, kPi / 2, EtaTarget::generate).eta_min;
    const double d = min_eta_cav(p, c, 2 * kPi, EtaTarget::generate).eta_min;
    CHECK(a <= b);
    CHECK(b <= d);
  }
}

TEST_CASE("scheme ordering") {
  const ProtocolConfig c;
  for (double theta : {0.0, kPi / 2, 2 * kPi}) {
    for (bool squeeze : {false, true}) {
      double e[3];
      int k = 0;
      for (Protocol p : {Protocol::om, Protocol::noninterferometric, Protocol::interferometric}) {
        ProtocolConfig q = c;
        q.theta = q.phi = theta;
        double best = 0.0;
        for (int i = 1; i <= 60; ++i) {
          q.chi = 0.1 * i;
          q.r = squeeze ? optimize_r(p, q.chi, q).r : 0.0;
          best = std::max(best, state_log_neg(p, q));
        }
        e[k++] = best;
      }
      CHECK(e[0] > e[1]);
      CHECK(e[1] > e[2]);
    }
  }
}

TEST_CASE("large-chi bound") {
  ProtocolConfig c;
  const LargeChiBound b = large_chi_bound(c);
  CHECK(b.c_opt > 0.0);
  CHECK(std::isfinite(b.f1));
  CHECK(std::isfinite(b.f2));
  CHECK(std::isfinite(b.f3));
  CHECK_FALSE(b.infeasible);
  CHECK(b.f_value == doctest::Approx(50.86).epsilon(1e-4));
  CHECK(b.c_opt == doctest::Approx(0.0196545890365).epsilon(1e-10));

  c.gamma = 1e-12;
  CHECK(large_chi_bound(c).c_opt < 1e-12);

  CHECK(large_chi_lambda(ProtocolConfig{}, 1e3, 0.9 * b.f_value, SqueezingAnsatz::exp2r) < 0.0);
  CHECK(large_chi_lambda(ProtocolConfig{}, 1e3, 1.1 * b.f_value, SqueezingAnsatz::exp2r) >= 0.0);
}

TEST_CASE("squeezer-before-loss ansatz removes the decline in chi") {
  const ProtocolConfig c;
  const double vp = 0.9 * large_chi_bound(c).f_value;
  double prev = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double chi = 0.1 * k;
    const double e = log_negativity(large_chi_state(c, chi, vp, SqueezingAnsatz::exp2r).cov).log_neg;
    CHECK(e >= prev - 1e-9);
    prev = e;
  }
}
