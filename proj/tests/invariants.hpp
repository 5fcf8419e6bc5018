#pragma once

// Randomised physics invariants. Each returns the number of failing cases.

#include <cmath>

#include "pom/closed_forms.hpp"
#include "pom/protocols.hpp"
#include "support.hpp"

namespace pom::test {

inline double min_nu(const Mat& cov) { return symplectic_eigenvalues(0.5 * (cov + cov.transpose())).front(); }

inline int symplecticity_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> nm(2, 4);
  int fails = 0;
  for (int k = 0; k < cases; ++k) {
    const int n = nm(rng);
    const int a = static_cast<int>(rng() % n);
    int b = static_cast<int>(rng() % n);
    if (b == a) b = (a + 1) % n;
    const double x = u(rng), y = u(rng);
    const SymplecticOp ops[] = {make_rotation(x),
                                make_squeezer(x / 4),
                                make_beamsplitter(x, y),
                                make_pulsed_om(x, a, b, n),
                                embed(make_beamsplitter(x, y), {b, a}, n),
                                random_symplectic(n, rng)};
    for (const SymplecticOp& s : ops) {
      const Mat om = omega(s.n_modes());
      const double scale = s.matrix.cwiseAbs().maxCoeff();
      if (!(max_abs(s.matrix * om * s.matrix.transpose() - om) < 1e-10 * std::max(1.0, scale * scale))) ++fails;
    }
  }
  return fails;
}

// Symplectic maps keep the symplectic spectrum; loss and thermal channels keep nu >= 1/2.
inline int physicality_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int fails = 0;
  for (int k = 0; k < cases; ++k) {
    const GaussianState s = random_state(2, rng, 0.8);
    const auto before = symplectic_eigenvalues(s.cov);
    const GaussianState moved = apply_symplectic(s, random_symplectic(2, rng, 0.8));
    const auto after = symplectic_eigenvalues(0.5 * (moved.cov + moved.cov.transpose()));
    for (int i = 0; i < 2; ++i)
      if (std::abs(before[i] - after[i]) > 1e-9 * std::max(1.0, before[i])) ++fails;
    const GaussianState out =
        apply_channel(s, thermal_decoherence(u01(rng), 5 * u01(rng), static_cast<int>(rng() % 2), 2));
    if (min_nu(out.cov) < 0.5 - 1e-9) ++fails;
    const GaussianState lossy = apply_channel(out, optical_loss(u01(rng), static_cast<int>(rng() % 2), 2));
    if (min_nu(lossy.cov) < 0.5 - 1e-9) ++fails;
    if (Eigen::SelfAdjointEigenSolver<Mat>(lossy.cov).eigenvalues().minCoeff() <= 0.0) ++fails;
  }
  return fails;
}

inline int homodyne_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi), out(-50.0, 50.0);
  int fails = 0;
  for (int k = 0; k < cases; ++k) {
    const GaussianState s = random_state(3, rng);
    const int mode = static_cast<int>(rng() % 3);
    const double phi = ang(rng);
    const GaussianState a = homodyne_update(s, {mode, phi, out(rng)});
    const GaussianState b = homodyne_update(s, {mode, phi, out(rng)});
    if (!(a.cov.array() == b.cov.array()).all()) ++fails;
    if (min_nu(a.cov) < 0.5 - 1e-9) ++fails;
  }
  return fails;
}

inline int local_invariance_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int fails = 0;
  for (int k = 0; k < cases; ++k) {
    const GaussianState s = random_state(2, rng, 0.8, 1.0);
    const double e = log_negativity(s.cov).log_neg;
    Mat l = Mat::Zero(4, 4);
    l.block(0, 0, 2, 2) = random_symplectic(1, rng, 0.8).matrix;
    l.block(2, 2, 2, 2) = random_symplectic(1, rng, 0.8).matrix;
    Mat moved = l * s.cov * l.transpose();
    moved = 0.5 * (moved + moved.transpose());
    if (std::abs(log_negativity(moved, false).log_neg - e) > 1e-9) ++fails;
  }
  return fails;
}

// Cases within 1e-9 of the separability boundary are skipped, not counted.
struct LambdaCheck {
  int fails = 0;
  int entangled = 0;
};

inline LambdaCheck lambda_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LambdaCheck out;
  int checked = 0;
  while (checked < cases) {
    const GaussianState s = random_state(2, rng, 0.8, 0.6);
    const EntanglementReport rep = log_negativity(s.cov);
    if (std::abs(2 * rep.nu_minus - 1.0) < 1e-9) continue;
    ++checked;
    if (rep.log_neg > 0) ++out.entangled;
    if ((rep.log_neg > 0) != (rep.ppt_lambda < 0)) ++out.fails;
    if ((rep.log_neg > 0) != (ppt_lambda(s.cov) < 0)) ++out.fails;
  }
  return out;
}

// gamma = 0, lossless: m pulses of strength chi equal one pulse of chi sqrt(m).
inline int precool_equivalence_failures(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> chi(0.1, 3.0), nb(0.0, 100.0);
  int fails = 0;
  for (int k = 0; k < cases; ++k) {
    ProtocolConfig c;
    c.gamma = 0.0;
    c.eta_cav = c.eta_det = 1.0;
    c.n_bar = nb(rng);
    c.chi = chi(rng);
    c.precool_pulses = 1 + static_cast<int>(rng() % 5);
    const Mat many = precool(c).state.cov;
    ProtocolConfig one = c;
    one.chi = c.chi * std::sqrt(static_cast<double>(c.precool_pulses));
    one.precool_pulses = 1;
    const Mat single = precool(one).state.cov;
    if (max_abs(many - single) > 1e-10 * std::max(1.0, max_abs(single))) ++fails;
  }
  return fails;
}

// Largest absolute element deviation between the closed forms and the
// numeric pipelines at one configuration.
inline double oracle_deviation(const ProtocolConfig& c) {
  const PrecooledState num = precool(c);
  const auto cf = closed_form::precool(c);
  double d = std::max(std::abs(num.V_x - cf.V_x), std::abs(num.V_p - cf.V_p));
  d = std::max(d, max_abs(om_entangle(c).cov - closed_form::om_state(c)));
  d = std::max(d, max_abs(interferometric_entangle(c).cov - closed_form::interferometric_state(c)));
  d = std::max(d, max_abs(noninterferometric_entangle(c).cov - closed_form::noninterferometric_state(c)));
  return d;
}

}  // namespace pom::test
