#include "pom/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pom {

EstimationMode parse_mode(const std::string& name) {
  if (name == "plain") return EstimationMode::plain;
  if (name == "time" || name == "conservative_time") return EstimationMode::conservative_time;
  if (name == "time_noise" || name == "conservative_time_noise") return EstimationMode::conservative_time_noise;
  throw InvalidArgument("unknown estimation mode '" + name + "' (expected plain, time or time_noise)");
}

std::string mode_name(EstimationMode m) {
  switch (m) {
    case EstimationMode::plain: return "plain";
    case EstimationMode::conservative_time: return "conservative_time";
    case EstimationMode::conservative_time_noise: return "conservative_time_noise";
  }
  return "?";
}

namespace {

int unique_index(int i, int j) {
  if (i > j) std::swap(i, j);
  static const int table[4][4] = {{0, 1, 2, 3}, {1, 4, 5, 6}, {2, 5, 7, 8}, {3, 6, 8, 9}};
  return table[i][j];
}

// Quadrature cos(t) X + sin(t) P of one mode of the verified pair.
Eigen::Vector4d quad(int mode, double t) {
  Eigen::Vector4d u = Eigen::Vector4d::Zero();
  u(2 * mode) = std::cos(t);
  u(2 * mode + 1) = std::sin(t);
  return u;
}

RecipeTerm var_term(double coef, const Eigen::Vector4d& u, std::array<double, 2> angles) {
  return {coef, u, u, angles};
}

RecipeTerm cov_term(double coef, const Eigen::Vector4d& u, const Eigen::Vector4d& v, std::array<double, 2> angles) {
  return {coef, u, v, angles};
}

struct Readout {
  Vec mean;
  Mat cov;
};

struct Part {
  int readout;
  int output;
  double weight;
};

// element = scale * (sum_k weight_k Var(output_k) + shift)
struct Combination {
  std::vector<Part> parts;
  double shift = 0.0;
  double scale = 1.0;
};

struct Plan {
  std::vector<Readout> readouts;
  std::array<Combination, 10> combos;
  std::array<ElementRecipe, 10> recipes;
};

class Planner {
 public:
  Planner(Protocol p, const ProtocolConfig& c, EstimationMode mode, const Mat& s0, const Vec& m0)
      : p_(p), c_(c), mode_(mode), s0_(s0), m0_(m0) {
    eta_ = c.verification_eta();
    chi_ = c.chi;
    off_ = mode == EstimationMode::plain ? 0.0 : 2.0 * kPi;
    mech_ = p == Protocol::om ? std::array<bool, 2>{false, true} : std::array<bool, 2>{true, true};
  }

  Plan build() {
    if (p_ == Protocol::om) {
      light_block();
      mech_block(1, 2);
      om_correlations();
    } else {
      mech_block(0, 0);
      mech_block(1, 2);
      if (p_ == Protocol::interferometric)
        int_correlations();
      else
        non_correlations();
    }
    return plan_;
  }

  std::array<bool, 2> mechanical() const { return mech_; }

 private:
  GaussianState decohered(std::array<double, 2> angles) const {
    GaussianState s{2, m0_, s0_};
    for (int k = 0; k < 2; ++k)
      if (mech_[k])
        s = apply_channel(s, mechanical_decoherence(c_.gamma, c_.N_bar, c_.omega_m, angles[k], k, s.n_modes));
    return s;
  }

  // Appends a probe pulse that reads the lab-frame position of mech through
  // the mechanical phase-space angle t, with coupling chi.
  static int add_probe(GaussianState& s, int mech, double t, double chi) {
    s = tensor(s, vacuum(1));
    const int probe = s.n_modes - 1;
    GaussianState r = apply_local(s, make_rotation(t), {mech});
    s = apply_symplectic(r, make_pulsed_om(chi, probe, mech, s.n_modes));
    return probe;
  }

  static void lose(GaussianState& s, int mode, double eta) { s = apply_channel(s, optical_loss(eta, mode, s.n_modes)); }

  int read(const GaussianState& s, const std::vector<std::pair<int, int>>& outputs) {
    const Eigen::Index d = static_cast<Eigen::Index>(outputs.size());
    Mat w = Mat::Zero(d, s.cov.rows());
    for (Eigen::Index o = 0; o < d; ++o) w(o, 2 * outputs[o].first + outputs[o].second) = 1.0;
    plan_.readouts.push_back({w * s.mean, w * s.cov * w.transpose()});
    return static_cast<int>(plan_.readouts.size()) - 1;
  }

  void set(int i, int j, Combination comb, ElementRecipe rec) {
    const int e = unique_index(i, j);
    rec.i = std::min(i, j);
    rec.j = std::max(i, j);
    plan_.combos[e] = std::move(comb);
    plan_.recipes[e] = std::move(rec);
  }

  bool noise_mode() const { return mode_ == EstimationMode::conservative_time_noise; }

  // Optical block of the optical-mechanical state, homodyned directly.
  void light_block() {
    auto direct = [&](double t) {
      GaussianState s{2, m0_, s0_};
      lose(s, 0, eta_);
      GaussianState r = apply_local(s, make_rotation(t), {0});
      return read(r, {{0, 0}});
    };
    const double unloss = -(1.0 - eta_) / 2.0;
    set(0, 0, {{{direct(0.0), 0, 1.0}}, unloss, 1.0 / eta_}, {0, 0, {var_term(1.0, quad(0, 0.0), {0, 0})}, 0.0});
    set(1, 1, {{{direct(kPi / 2), 0, 1.0}}, unloss, 1.0 / eta_},
        {1, 1, {var_term(1.0, quad(0, kPi / 2), {0, 0})}, 0.0});
    // P_L(t) is the quadrature at angle t + pi/2.
    const int p34 = direct(5 * kPi / 4), p14 = direct(3 * kPi / 4);
    set(0, 1, {{{p34, 0, 0.5}, {p14, 0, -0.5}}, 0.0, 1.0 / eta_},
        {0, 1, {var_term(0.5, quad(0, 5 * kPi / 4), {0, 0}), var_term(-0.5, quad(0, 3 * kPi / 4), {0, 0})}, 0.0});
  }

  std::array<double, 2> at(int mode, double t) const {
    std::array<double, 2> a{0.0, 0.0};
    a[mode] = t;
    return a;
  }

  // Single-mechanics block read by a directly detected probe. base is the
  // sigma_ver index of the block's X quadrature.
  void mech_block(int mode, int base) {
    auto probe = [&](double t) {
      GaussianState s = decohered(at(mode, t));
      const int pr = add_probe(s, mode, t, chi_);
      lose(s, pr, eta_);
      return read(s, {{pr, 1}});
    };
    const double chi2 = chi_ * chi_;
    // Noisy mode leaves Var(P_in) in; the loss-mode share is still removed.
    const double shift = noise_mode() ? -(1.0 - eta_) / 2.0 : -0.5;
    const double noise = noise_mode() ? 0.5 / chi2 : 0.0;
    const double sc = 1.0 / (eta_ * chi2);
    set(base, base, {{{probe(0.0), 0, 1.0}}, shift, sc}, {0, 0, {var_term(1.0, quad(mode, 0.0), at(mode, 0.0))}, noise});
    set(base + 1, base + 1, {{{probe(kPi / 2), 0, 1.0}}, shift, sc},
        {0, 0, {var_term(1.0, quad(mode, kPi / 2), at(mode, kPi / 2))}, noise});
    const int r14 = probe(kPi / 4), r34 = probe(3 * kPi / 4);
    set(base, base + 1, {{{r14, 0, 0.5}, {r34, 0, -0.5}}, 0.0, sc},
        {0, 0,
         {var_term(0.5, quad(mode, kPi / 4), at(mode, kPi / 4)),
          var_term(-0.5, quad(mode, 3 * kPi / 4), at(mode, 3 * kPi / 4))},
         0.0});
  }

  // Light interfered with the mechanical probe on a 50:50 beamsplitter.
  void om_correlations() {
    for (int j = 0; j < 2; ++j) {
      const double t = off_ + j * kPi / 2;
      for (int i = 0; i < 2; ++i) {
        GaussianState s = decohered({0.0, t});
        const int pr = add_probe(s, 1, t, chi_);
        lose(s, pr, eta_);
        lose(s, 0, eta_);
        // Row X_L: S_bs(pi/4, pi/2) gives (P_V + X_L)/sqrt2 and (X_L - P_V)/sqrt2.
        // Row P_L: S_bs(pi/4, 0) gives (P_V + P_L)/sqrt2 and (P_L - P_V)/sqrt2.
        s = apply_local(s, make_beamsplitter(kPi / 4, i == 0 ? kPi / 2 : 0.0), {pr, 0});
        const int r = read(s, {{pr, 1}, {0, i == 0 ? 0 : 1}});
        set(i, 2 + j, {{{r, 0, 1.0}, {r, 1, -1.0}}, 0.0, 1.0 / (2.0 * chi_ * eta_)},
            {0, 0, {cov_term(1.0, quad(0, i * kPi / 2), quad(1, t), {0.0, t})}, 0.0});
      }
    }
  }

  // Two probes mixed on a 50:50 beamsplitter: delta = Var(P+) - Var(P-).
  void int_correlations() {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double a = off_ + i * kPi / 2, b = off_ + j * kPi / 2;
        GaussianState s = decohered({a, b});
        const int p1 = add_probe(s, 0, a, chi_);
        const int p2 = add_probe(s, 1, b, chi_);
        lose(s, p1, eta_);
        lose(s, p2, eta_);
        s = apply_local(s, make_beamsplitter(kPi / 4, 0.0), {p1, p2});
        const int r = read(s, {{p1, 1}, {p2, 1}});
        set(i, 2 + j, {{{r, 0, 1.0}, {r, 1, -1.0}}, 0.0, 1.0 / (2.0 * chi_ * chi_ * eta_)},
            {0, 0, {cov_term(1.0, quad(0, a), quad(1, b), {a, b})}, 0.0});
      }
  }

  // One probe through both mechanics; mech2 is reached later (b >= a) and
  // with the coupling reduced by the intervening loss.
  int serial_probe(double a, double b) {
    GaussianState s = decohered({a, b});
    s = tensor(s, vacuum(1));
    const int pr = s.n_modes - 1;
    s = apply_local(s, make_rotation(a), {0});
    s = apply_symplectic(s, make_pulsed_om(chi_, pr, 0, s.n_modes));
    lose(s, pr, eta_);
    s = apply_local(s, make_rotation(b), {1});
    s = apply_symplectic(s, make_pulsed_om(std::sqrt(eta_) * chi_, pr, 1, s.n_modes));
    lose(s, pr, eta_);
    return read(s, {{pr, 1}});
  }

  // epsilon(a, b) = Var(P_V(a, b)) - Var(P_V(a, b + pi)).
  void non_correlations() {
    struct Entry {
      int i, j;
      double a, b, sign;
    };
    const Entry entries[4] = {{0, 0, 0.0, 0.0, 1.0},
                              {0, 1, 0.0, kPi / 2, 1.0},
                              {1, 0, kPi / 2, kPi, -1.0},
                              {1, 1, kPi / 2, kPi / 2, 1.0}};
    const double eta2 = eta_ * eta_;
    for (const Entry& en : entries) {
      const double a = off_ + en.a, b = off_ + en.b;
      const int r1 = serial_probe(a, b), r2 = serial_probe(a, b + kPi);
      const Eigen::Vector4d u1 = quad(0, a) + quad(1, b), u2 = quad(0, a) + quad(1, b + kPi);
      set(en.i, 2 + en.j, {{{r1, 0, 1.0}, {r2, 0, -1.0}}, 0.0, en.sign / (4.0 * chi_ * chi_ * eta2)},
          {0, 0, {var_term(0.25 * en.sign, u1, {a, b}), var_term(-0.25 * en.sign, u2, {a, b + kPi})}, 0.0});
    }
  }

  Protocol p_;
  const ProtocolConfig& c_;
  EstimationMode mode_;
  Mat s0_;
  Vec m0_;
  double eta_ = 1.0, chi_ = 0.0, off_ = 0.0;
  std::array<bool, 2> mech_{false, true};
  Plan plan_;
};

VerifiedCovariance assemble(Protocol p, const ProtocolConfig& c, EstimationMode mode, const Plan& plan,
                            std::array<bool, 2> mech, const std::array<double, 10>& values) {
  VerifiedCovariance v;
  v.protocol = p;
  v.mode = mode;
  v.chi = c.chi;
  v.eta_ver = c.verification_eta();
  v.mechanical = mech;
  v.sigma_ver = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) v.sigma_ver(i, j) = v.sigma_ver(j, i) = values[unique_index(i, j)];
  v.recipes.assign(plan.recipes.begin(), plan.recipes.end());
  return v;
}

void check_inputs(const ProtocolConfig& config, const Mat& sigma0, const Vec& mean0) {
  config.validate();
  if (!(std::abs(config.chi) > 0.0)) throw InvalidArgument("verification needs a nonzero interaction strength");
  if (sigma0.rows() != 4 || sigma0.cols() != 4 || mean0.size() != 4)
    throw InvalidArgument("verification: expected a two-mode sigma(0)");
}

}  // namespace

const ElementRecipe& VerifiedCovariance::recipe(int i, int j) const {
  if (i < 0 || j < 0 || i > 3 || j > 3) throw InvalidArgument("recipe: index out of range");
  return recipes.at(unique_index(i, j));
}

std::vector<double> VerifiedCovariance::element_angles(int i, int j) const {
  std::vector<double> out;
  for (const RecipeTerm& t : recipe(i, j).terms)
    for (int k = 0; k < 2; ++k) {
      const bool touches = t.u(2 * k) != 0.0 || t.u(2 * k + 1) != 0.0 || t.v(2 * k) != 0.0 || t.v(2 * k + 1) != 0.0;
      if (mechanical[k] && touches) out.push_back(t.angles[k]);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
            out.end());
  return out;
}

VerifiedCovariance build_sigma_ver_from(Protocol p, const ProtocolConfig& config, EstimationMode mode,
                                        const Mat& sigma0, const Vec& mean0) {
  check_inputs(config, sigma0, mean0);
  Planner planner(p, config, mode, sigma0, mean0);
  const Plan plan = planner.build();
  std::array<double, 10> values{};
  for (int e = 0; e < 10; ++e) {
    const Combination& cb = plan.combos[e];
    double acc = cb.shift;
    for (const Part& pt : cb.parts) acc += pt.weight * plan.readouts[pt.readout].cov(pt.output, pt.output);
    values[e] = cb.scale * acc;
  }
  return assemble(p, config, mode, plan, planner.mechanical(), values);
}

VerifiedCovariance build_sigma_ver(Protocol p, const ProtocolConfig& config, EstimationMode mode) {
  const GaussianState s0 = entangle_at(p, config, 0.0, 0.0);
  return build_sigma_ver_from(p, config, mode, s0.cov, s0.mean);
}

namespace {

struct AffineModel {
  Eigen::Matrix<double, 10, 10> L = Eigen::Matrix<double, 10, 10>::Zero();
  Eigen::Matrix<double, 10, 1> b = Eigen::Matrix<double, 10, 1>::Zero();
};

// sigma_ver = L * vech(sigma(0)) + b for the idealised recipes.
AffineModel affine_model(const VerifiedCovariance& ver, double gamma, double N_bar, double omega_m) {
  AffineModel m;
  const double env = N_bar + 0.5;
  for (int e = 0; e < 10; ++e) {
    const ElementRecipe& rec = ver.recipes.at(e);
    m.b(e) += rec.offset;
    for (const RecipeTerm& t : rec.terms) {
      double g[2];
      for (int k = 0; k < 2; ++k) {
        g[k] = ver.mechanical[k] ? std::exp(-gamma * t.angles[k] / omega_m) : 1.0;
        if (ver.mechanical[k] && g[k] <= 1e-12) throw SingularInversion("inverse_map: vanishing gain factor");
      }
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
          const double w = t.coef * t.u(p) * t.v(q);
          if (w == 0.0) continue;
          const double gp = g[p / 2], gq = g[q / 2];
          m.L(e, unique_index(p, q)) += w * std::sqrt(gp * gq);
          if (p == q) m.b(e) += w * (1.0 - gp) * env;
        }
    }
  }
  return m;
}

Mat unvech(const Eigen::Matrix<double, 10, 1>& x) {
  Mat s(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s(i, j) = x(unique_index(i, j));
  return s;
}

}  // namespace

Mat evaluate_recipes(const VerifiedCovariance& ver, const Mat& sigma0, double gamma, double N_bar, double omega_m) {
  if (sigma0.rows() != 4 || sigma0.cols() != 4) throw InvalidArgument("evaluate_recipes: expected 4x4");
  const AffineModel m = affine_model(ver, gamma, N_bar, omega_m);
  Eigen::Matrix<double, 10, 1> x;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) x(unique_index(i, j)) = sigma0(i, j);
  return unvech(m.L * x + m.b);
}

InverseMapResult inverse_map(const VerifiedCovariance& ver, double gamma, double N_bar, double omega_m,
                             const Mat* truth) {
  if (ver.recipes.size() != 10) throw InvalidArgument("inverse_map: missing element recipes");
  if (!(gamma >= 0.0) || !(omega_m > 0.0)) throw InvalidArgument("inverse_map: need gamma >= 0 and omega_m > 0");
  const AffineModel m = affine_model(ver, gamma, N_bar, omega_m);
  Eigen::Matrix<double, 10, 1> y;
  for (int e = 0; e < 10; ++e) y(e) = ver.sigma_ver(ver.recipes[e].i, ver.recipes[e].j) - m.b(e);

  Eigen::Matrix<double, 10, 1> x = Eigen::Matrix<double, 10, 1>::Zero();
  std::array<bool, 10> done{};
  auto depends = [&](int e, int k) { return std::abs(m.L(e, k)) > 1e-12 * m.L.row(e).cwiseAbs().maxCoeff(); };
  for (int e = 0; e < 10; ++e)
    if (!(std::abs(m.L(e, e)) > 1e-12 * m.L.row(e).cwiseAbs().maxCoeff()))
      throw SingularInversion("inverse_map: element does not determine its own entry");

  // Elements that depend only on their own entry resolve first; the rest
  // follow once everything they mix in is known.
  int solved = 0;
  while (solved < 10) {
    bool progress = false;
    for (int e = 0; e < 10; ++e) {
      if (done[e]) continue;
      bool ready = true;
      for (int k = 0; k < 10; ++k)
        if (k != e && !done[k] && depends(e, k)) ready = false;
      if (!ready) continue;
      double rhs = y(e);
      for (int k = 0; k < 10; ++k)
        if (k != e && done[k]) rhs -= m.L(e, k) * x(k);
      x(e) = rhs / m.L(e, e);
      done[e] = true;
      ++solved;
      progress = true;
    }
    if (!progress) {
      // Mutually dependent elements: solve the remaining block jointly.
      std::vector<int> rest;
      for (int e = 0; e < 10; ++e)
        if (!done[e]) rest.push_back(e);
      const int n = static_cast<int>(rest.size());
      Eigen::MatrixXd A(n, n);
      Eigen::VectorXd rhs(n);
      for (int a = 0; a < n; ++a) {
        rhs(a) = y(rest[a]);
        for (int k = 0; k < 10; ++k)
          if (done[k]) rhs(a) -= m.L(rest[a], k) * x(k);
        for (int c = 0; c < n; ++c) A(a, c) = m.L(rest[a], rest[c]);
      }
      const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
      for (int a = 0; a < n; ++a) {
        x(rest[a]) = sol(a);
        done[rest[a]] = true;
      }
      solved = 10;
    }
  }
  InverseMapResult out;
  out.sigma_zero_est = unvech(x);
  if (truth) out.residual = (out.sigma_zero_est - *truth).cwiseAbs().maxCoeff();
  return out;
}

MonteCarloResult monte_carlo_sigma_ver(Protocol p, const ProtocolConfig& config, EstimationMode mode,
                                       std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw InvalidArgument("monte_carlo_sigma_ver: need at least two samples");
  const GaussianState s0 = entangle_at(p, config, 0.0, 0.0);
  check_inputs(config, s0.cov, s0.mean);
  Planner planner(p, config, mode, s0.cov, s0.mean);
  const Plan plan = planner.build();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double n = static_cast<double>(n_samples);

  // Centered samples per readout, one column per detector output.
  std::vector<Eigen::MatrixXd> centered;
  for (const Readout& ro : plan.readouts) {
    const Eigen::Index d = ro.cov.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(ro.cov));
    const Eigen::MatrixXd factor =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::MatrixXd y(n_samples, d);
    Eigen::VectorXd z(d);
    for (std::int64_t k = 0; k < n_samples; ++k) {
      for (Eigen::Index o = 0; o < d; ++o) z(o) = normal(rng);
      y.row(k) = (ro.mean + factor * z).transpose();
    }
    // First moments are estimated from the same record and removed.
    const Eigen::RowVectorXd mu = y.colwise().mean();
    y.rowwise() -= mu;
    centered.push_back(std::move(y));
  }

  std::array<double, 10> values{};
  std::array<double, 10> errors{};
  for (int e = 0; e < 10; ++e) {
    const Combination& cb = plan.combos[e];
    double acc = cb.shift;
    double var_sum = 0.0;
    std::vector<int> used;
    for (const Part& pt : cb.parts)
      if (std::find(used.begin(), used.end(), pt.readout) == used.end()) used.push_back(pt.readout);
    for (int r : used) {
      Eigen::VectorXd zk = Eigen::VectorXd::Zero(n_samples);
      for (const Part& pt : cb.parts)
        if (pt.readout == r) zk += pt.weight * centered[r].col(pt.output).array().square().matrix();
      acc += zk.sum() / (n - 1.0);
      const double zm = zk.mean();
      var_sum += (zk.array() - zm).square().sum() / (n - 1.0) / n;
    }
    values[e] = cb.scale * acc;
    errors[e] = std::abs(cb.scale) * std::sqrt(var_sum);
  }
  MonteCarloResult out;
  out.ver = assemble(p, config, mode, plan, planner.mechanical(), values);
  out.standard_errors = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) out.standard_errors(i, j) = out.standard_errors(j, i) = errors[unique_index(i, j)];
  return out;
}

}  // namespace pom
