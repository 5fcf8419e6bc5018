#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pom/verification.hpp"
#include "support.hpp"

using namespace pom;
using pom::test::max_abs;

namespace {

const Protocol kAll[3] = {Protocol::om, Protocol::interferometric, Protocol::noninterferometric};
const EstimationMode kModes[3] = {EstimationMode::plain, EstimationMode::conservative_time,
                                  EstimationMode::conservative_time_noise};

ProtocolConfig at(double chi, double r) {
  ProtocolConfig c;
  c.chi = chi;
  c.r = r;
  return c;
}

double en_ver(const VerifiedCovariance& v) { return log_negativity(v.sigma_ver, false).log_neg; }

double en_s0(Protocol p, const ProtocolConfig& c) { return log_negativity(entangle_at(p, c, 0, 0).cov).log_neg; }

}  // namespace

TEST_CASE("mode names") {
  CHECK(parse_mode("plain") == EstimationMode::plain);
  CHECK(parse_mode("time") == EstimationMode::conservative_time);
  CHECK(parse_mode("time_noise") == EstimationMode::conservative_time_noise);
  CHECK(mode_name(EstimationMode::conservative_time) == "conservative_time");
  CHECK_THROWS_AS(parse_mode("loose"), InvalidArgument);
}

TEST_CASE("ideal plain verification reproduces sigma(0)") {
  for (Protocol p : kAll) {
    ProtocolConfig c = at(2.5, 0.3);
    c.gamma = 0.0;
    c.eta_ver = 1.0;
    const VerifiedCovariance v = build_sigma_ver(p, c, EstimationMode::plain);
    CHECK(max_abs(v.sigma_ver - entangle_at(p, c, 0, 0).cov) < 1e-10);
    CHECK(max_abs(v.sigma_ver - v.sigma_ver.transpose()) < 1e-12);
  }
}

TEST_CASE("chi = 0 cannot be verified") {
  CHECK_THROWS_AS(build_sigma_ver(Protocol::om, at(0.0, 0.0), EstimationMode::plain), InvalidArgument);
}

TEST_CASE("element timing metadata") {
  const VerifiedCovariance om = build_sigma_ver(Protocol::om, at(3.0, 0.2), EstimationMode::conservative_time);
  CHECK(om.recipes.size() == 10);
  CHECK(om.element_angles(0, 0).empty());  // optical
  CHECK(om.element_angles(2, 2) == std::vector<double>{0.0});
  CHECK(om.element_angles(3, 3) == std::vector<double>{kPi / 2});
  const auto b12 = om.element_angles(2, 3);
  REQUIRE(b12.size() == 2);
  CHECK(b12[0] == doctest::Approx(kPi / 4));
  CHECK(b12[1] == doctest::Approx(3 * kPi / 4));
  CHECK(om.element_angles(1, 3) == std::vector<double>{2 * kPi + kPi / 2});

  const VerifiedCovariance non =
      build_sigma_ver(Protocol::noninterferometric, at(3.0, 0.2), EstimationMode::conservative_time);
  // The (2,1) correlation uses epsilon(5pi/2, 3pi).
  const auto c21 = non.element_angles(1, 2);
  CHECK(c21.front() == doctest::Approx(2.5 * kPi));
  CHECK(c21.back() == doctest::Approx(4 * kPi));
  const VerifiedCovariance plain = build_sigma_ver(Protocol::noninterferometric, at(3.0, 0.2), EstimationMode::plain);
  CHECK(plain.element_angles(0, 2) == std::vector<double>{0.0, kPi});
}

TEST_CASE("recipes reproduce the physical readout model") {
  // With exact decoherence parameters the idealised recipes evaluated on
  // sigma(0) give the same sigma_ver as the simulated measurements.
  for (Protocol p : kAll)
    for (EstimationMode m : kModes) {
      const ProtocolConfig c = at(2.7, 0.2);
      const VerifiedCovariance v = build_sigma_ver(p, c, m);
      const Mat s0 = entangle_at(p, c, 0, 0).cov;
      CHECK(max_abs(evaluate_recipes(v, s0, c.gamma, c.N_bar, c.omega_m) - v.sigma_ver) < 1e-9);
    }
}

TEST_CASE("verification is independent of the verification efficiency") {
  for (Protocol p : kAll)
    for (EstimationMode m : kModes) {
      ProtocolConfig c = at(3.0, 0.3);
      c.eta_ver = 1.0;
      const Mat ref = build_sigma_ver(p, c, m).sigma_ver;
      for (double eta : {0.855, 0.5}) {
        c.eta_ver = eta;
        CHECK(max_abs(build_sigma_ver(p, c, m).sigma_ver - ref) < 1e-9);
      }
    }
}

TEST_CASE("conservative estimates never overstate entanglement") {
  for (Protocol p : kAll) {
    for (int k = 0; k < 20; ++k) {
      const ProtocolConfig c = at(0.5 + 0.5 * k, 0.1);
      const double s0 = en_s0(p, c);
      const double t = en_ver(build_sigma_ver(p, c, EstimationMode::conservative_time));
      const double tn = en_ver(build_sigma_ver(p, c, EstimationMode::conservative_time_noise));
      CHECK(s0 >= t);
      CHECK(t >= tn);
    }
  }
}

TEST_CASE("noise-conservative estimate converges at large chi") {
  for (Protocol p : kAll) {
    const ProtocolConfig c = at(20.0, 0.0);
    const double t = en_ver(build_sigma_ver(p, c, EstimationMode::conservative_time));
    const double tn = en_ver(build_sigma_ver(p, c, EstimationMode::conservative_time_noise));
    if (t > 0) CHECK((t - tn) / t < 0.01);
  }
}

TEST_CASE("reconstructed blocks are individually physical") {
  for (Protocol p : kAll)
    for (double chi : {1.0, 3.0, 8.0}) {
      const Mat s = build_sigma_ver(p, at(chi, 0.2), EstimationMode::conservative_time).sigma_ver;
      CHECK(max_abs(s - s.transpose()) < 1e-12);
      CHECK(is_physical(s.block(0, 0, 2, 2), 1e-9));
      CHECK(is_physical(s.block(2, 2, 2, 2), 1e-9));
    }
}

TEST_CASE("non-interferometric correlation sign") {
  // The printed minus on the (2,1) element agrees with the simulated pipeline:
  // plain, lossless, gamma = 0 reproduces sigma(0) including C_21.
  ProtocolConfig c = at(3.0, 0.15);
  c.gamma = 0.0;
  c.eta_ver = 1.0;
  const VerifiedCovariance v = build_sigma_ver(Protocol::noninterferometric, c, EstimationMode::conservative_time);
  const Mat s0 = entangle_at(Protocol::noninterferometric, c, 0, 0).cov;
  CHECK(v.sigma_ver(1, 2) == doctest::Approx(s0(1, 2)).epsilon(1e-10));
}

TEST_CASE("inverse map") {
  for (Protocol p : kAll) {
    const ProtocolConfig c = at(3.0, 0.3);
    const Mat s0 = entangle_at(p, c, 0, 0).cov;
    for (EstimationMode m : {EstimationMode::conservative_time, EstimationMode::plain}) {
      const VerifiedCovariance v = build_sigma_ver(p, c, m);
      const InverseMapResult r = inverse_map(v, c.gamma, c.N_bar, c.omega_m, &s0);
      REQUIRE(r.residual.has_value());
      CHECK(*r.residual < 1e-9);
    }
    const VerifiedCovariance v = build_sigma_ver(p, c, EstimationMode::conservative_time);
    const InverseMapResult off = inverse_map(v, 1.1 * c.gamma, c.N_bar, c.omega_m, &s0);
    CHECK(*off.residual > 0.0);
    CHECK_FALSE(inverse_map(v, c.gamma, c.N_bar, c.omega_m).residual.has_value());
  }
  // gamma = 0 is the identity.
  ProtocolConfig c = at(3.0, 0.3);
  c.gamma = 0.0;
  const VerifiedCovariance v = build_sigma_ver(Protocol::om, c, EstimationMode::conservative_time);
  CHECK(max_abs(inverse_map(v, 0.0, c.N_bar, c.omega_m).sigma_zero_est - v.sigma_ver) < 1e-12);
  // A gain that underflows cannot be inverted.
  CHECK_THROWS_AS(inverse_map(v, 1e10 * c.omega_m, c.N_bar, c.omega_m), SingularInversion);
}

TEST_CASE("Monte-Carlo estimator") {
  const ProtocolConfig c = at(2.7, 0.1);
  CHECK_THROWS_AS(monte_carlo_sigma_ver(Protocol::om, c, EstimationMode::conservative_time, 1, 1), InvalidArgument);

  for (Protocol p : kAll) {
    const VerifiedCovariance exact = build_sigma_ver(p, c, EstimationMode::conservative_time);
    const MonteCarloResult a = monte_carlo_sigma_ver(p, c, EstimationMode::conservative_time, 100000, 1);
    const Mat z = (a.ver.sigma_ver - exact.sigma_ver).array() / a.standard_errors.array();
    CHECK(max_abs(z) < 3.0);
    CHECK(max_abs(a.ver.sigma_ver - a.ver.sigma_ver.transpose()) == 0.0);
    const MonteCarloResult b = monte_carlo_sigma_ver(p, c, EstimationMode::conservative_time, 100000, 1);
    CHECK((a.ver.sigma_ver.array() == b.ver.sigma_ver.array()).all());
    CHECK((a.standard_errors.array() == b.standard_errors.array()).all());
  }

  // Standard errors shrink as 1/sqrt(n): variance ratio 100 between 1e3 and 1e5.
  const MonteCarloResult small = monte_carlo_sigma_ver(Protocol::om, c, EstimationMode::conservative_time, 1000, 9);
  const MonteCarloResult large = monte_carlo_sigma_ver(Protocol::om, c, EstimationMode::conservative_time, 100000, 9);
  const Mat ratio = small.standard_errors.array().square() / large.standard_errors.array().square();
  CHECK(ratio.minCoeff() > 50.0);
  CHECK(ratio.maxCoeff() < 200.0);
}

TEST_CASE("Monte-Carlo standard errors match the observed spread") {
  const ProtocolConfig c = at(2.7, 0.1);
  const Protocol p = Protocol::interferometric;
  const Mat exact = build_sigma_ver(p, c, EstimationMode::conservative_time).sigma_ver;
  Mat m2 = Mat::Zero(4, 4);
  const int reps = 100;
  for (int s = 0; s < reps; ++s) {
    const Mat d = monte_carlo_sigma_ver(p, c, EstimationMode::conservative_time, 2000, 500 + s).ver.sigma_ver - exact;
    m2 += d.cwiseProduct(d);
  }
  const Mat se = monte_carlo_sigma_ver(p, c, EstimationMode::conservative_time, 2000, 7).standard_errors;
  const Mat ratio = (m2 / reps).cwiseSqrt().array() / se.array();
  CHECK(ratio.minCoeff() > 0.7);
  CHECK(ratio.maxCoeff() < 1.4);
}
