#include "pom/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace pom {

namespace {

void require_even_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw InvalidArgument(std::string(what) + ": expected a nonempty even square matrix");
}

void require_mode(int mode, int n_modes, const char* what) {
  if (mode < 0 || mode >= n_modes) throw InvalidArgument(std::string(what) + ": mode index out of range");
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite argument");
}

}  // namespace

Mat omega(int n_modes) {
  Mat w = Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    w(2 * k, 2 * k + 1) = 1.0;
    w(2 * k + 1, 2 * k) = -1.0;
  }
  return w;
}

GaussianState vacuum(int n_modes) {
  if (n_modes < 1) throw InvalidArgument("vacuum: n_modes must be positive");
  return {n_modes, Vec::Zero(2 * n_modes), 0.5 * Mat::Identity(2 * n_modes, 2 * n_modes)};
}

GaussianState thermal(double n_bar) {
  if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) throw InvalidArgument("thermal: occupation must be >= 0");
  return {1, Vec::Zero(2), (0.5 + n_bar) * Mat::Identity(2, 2)};
}

bool is_symmetric(const Mat& cov, double tol) {
  if (cov.rows() != cov.cols()) return false;
  return (cov - cov.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, cov.cwiseAbs().maxCoeff());
}

double uncertainty_margin(const Mat& cov) {
  require_even_square(cov, "uncertainty_margin");
  const Eigen::Index d = cov.rows();
  Eigen::MatrixXcd h(d, d);
  const Mat w = omega(static_cast<int>(d / 2));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) h(i, j) = std::complex<double>(cov(i, j), 0.5 * w(i, j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_physical(const Mat& cov, double tol) {
  if (!is_symmetric(cov)) return false;
  if (!cov.allFinite()) return false;
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  return uncertainty_margin(0.5 * (cov + cov.transpose())) >= -tol * scale;
}

GaussianState make_state(const Vec& mean, const Mat& cov) {
  require_even_square(cov, "make_state");
  if (mean.size() != cov.rows()) throw InvalidArgument("make_state: mean and covariance sizes differ");
  if (!is_symmetric(cov)) throw InvalidState("make_state: covariance is not symmetric");
  if (!is_physical(cov)) throw InvalidState("make_state: covariance violates the uncertainty relation");
  return {static_cast<int>(cov.rows() / 2), mean, cov};
}

bool SymplecticOp::is_symplectic(double tol) const {
  if (matrix.rows() != matrix.cols() || matrix.rows() % 2 != 0) return false;
  const Mat w = omega(n_modes());
  return (matrix * w * matrix.transpose() - w).cwiseAbs().maxCoeff() < tol;
}

SymplecticOp make_rotation(double theta) {
  require_finite(theta, "make_rotation");
  const double c = std::cos(theta), s = std::sin(theta);
  Mat m(2, 2);
  m << c, s, -s, c;
  return {m};
}

SymplecticOp make_squeezer(double r) {
  require_finite(r, "make_squeezer");
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = std::exp(r);
  m(1, 1) = std::exp(-r);
  return {m};
}

SymplecticOp make_beamsplitter(double alpha, double beta) {
  require_finite(alpha, "make_beamsplitter");
  require_finite(beta, "make_beamsplitter");
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  Mat m(4, 4);
  m << ca, 0, sa * cb, -sa * sb,
       0, ca, sa * sb, sa * cb,
       -sa * cb, -sa * sb, ca, 0,
       sa * sb, -sa * cb, 0, ca;
  return {m};
}

SymplecticOp make_pulsed_om(double chi, int light_mode, int mech_mode, int n_modes) {
  require_finite(chi, "make_pulsed_om");
  if (n_modes < 2) throw InvalidArgument("make_pulsed_om: need at least two modes");
  require_mode(light_mode, n_modes, "make_pulsed_om");
  require_mode(mech_mode, n_modes, "make_pulsed_om");
  if (light_mode == mech_mode) throw InvalidArgument("make_pulsed_om: light and mechanical modes coincide");
  Mat m = Mat::Identity(2 * n_modes, 2 * n_modes);
  m(2 * light_mode + 1, 2 * mech_mode) = chi;
  m(2 * mech_mode + 1, 2 * light_mode) = chi;
  return {m};
}

SymplecticOp identity_op(int n_modes) { return {Mat::Identity(2 * n_modes, 2 * n_modes)}; }

SymplecticOp embed(const SymplecticOp& op, const std::vector<int>& modes, int n_modes) {
  if (static_cast<int>(modes.size()) != op.n_modes())
    throw InvalidArgument("embed: mode list does not match operation size");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    require_mode(modes[i], n_modes, "embed");
    for (std::size_t j = 0; j < i; ++j)
      if (modes[i] == modes[j]) throw InvalidArgument("embed: repeated mode");
  }
  Mat m = Mat::Identity(2 * n_modes, 2 * n_modes);
  for (std::size_t a = 0; a < modes.size(); ++a)
    for (std::size_t b = 0; b < modes.size(); ++b)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          m(2 * modes[a] + p, 2 * modes[b] + q) = op.matrix(2 * a + p, 2 * b + q);
  return {m};
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& s) {
  if (s.matrix.rows() != state.cov.rows() || s.matrix.cols() != state.cov.cols())
    throw InvalidArgument("apply_symplectic: dimension mismatch");
  GaussianState out = state;
  out.mean = s.matrix * state.mean;
  out.cov = s.matrix * state.cov * s.matrix.transpose();
  return out;
}

GaussianState apply_local(const GaussianState& state, const SymplecticOp& s, const std::vector<int>& modes) {
  return apply_symplectic(state, embed(s, modes, state.n_modes));
}

GaussianChannel optical_loss(double eta, int mode, int n_modes) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("optical_loss: efficiency outside [0,1]");
  return thermal_decoherence(eta, 0.0, mode, n_modes);
}

GaussianChannel thermal_decoherence(double gain, double n_env, int mode, int n_modes) {
  if (!(gain >= 0.0 && gain <= 1.0)) throw InvalidArgument("channel: gain outside [0,1]");
  if (!(n_env >= 0.0) || !std::isfinite(n_env)) throw InvalidArgument("channel: occupation must be >= 0");
  require_mode(mode, n_modes, "channel");
  GaussianChannel ch;
  ch.gain = Vec::Ones(2 * n_modes);
  ch.env_cov = 0.5 * Mat::Identity(2 * n_modes, 2 * n_modes);
  ch.gain(2 * mode) = ch.gain(2 * mode + 1) = gain;
  ch.env_cov(2 * mode, 2 * mode) = ch.env_cov(2 * mode + 1, 2 * mode + 1) = 0.5 + n_env;
  return ch;
}

GaussianChannel mechanical_decoherence(double gamma, double N_bar, double omega_m, double theta, int mode,
                                       int n_modes) {
  if (!(gamma >= 0.0) || !(omega_m > 0.0) || !(theta >= 0.0))
    throw InvalidArgument("mechanical_decoherence: need gamma >= 0, omega_m > 0, theta >= 0");
  return thermal_decoherence(std::exp(-gamma * theta / omega_m), N_bar, mode, n_modes);
}

GaussianState apply_channel(const GaussianState& state, const GaussianChannel& ch) {
  const Eigen::Index d = state.cov.rows();
  if (ch.gain.size() != d || ch.env_cov.rows() != d || ch.env_cov.cols() != d)
    throw InvalidArgument("apply_channel: dimension mismatch");
  if ((ch.gain.array() < 0.0).any() || (ch.gain.array() > 1.0).any())
    throw InvalidArgument("apply_channel: gain outside [0,1]");
  const Vec gh = ch.gain.cwiseSqrt();
  const Vec lh = (Vec::Ones(d) - ch.gain).cwiseSqrt();
  GaussianState out = state;
  out.mean = gh.asDiagonal() * state.mean;
  out.cov = gh.asDiagonal() * state.cov * gh.asDiagonal();
  out.cov += lh.asDiagonal() * ch.env_cov * lh.asDiagonal();
  return out;
}

Eigen::Matrix2d homodyne_projector(double angle) {
  const Eigen::Vector2d n(std::cos(angle), std::sin(angle));
  return n * n.transpose();
}

namespace {

std::vector<int> other_modes(int n_modes, int drop) {
  std::vector<int> keep;
  for (int k = 0; k < n_modes; ++k)
    if (k != drop) keep.push_back(k);
  return keep;
}

std::vector<int> quad_indices(const std::vector<int>& modes) {
  std::vector<int> idx;
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

}  // namespace

GaussianState homodyne_update(const GaussianState& state, const HomodyneMeasurement& meas) {
  require_mode(meas.mode, state.n_modes, "homodyne_update");
  if (state.n_modes < 2) throw InvalidArgument("homodyne_update: nothing left after measuring the only mode");
  require_finite(meas.angle, "homodyne_update");
  const Eigen::Vector2d n(std::cos(meas.angle), std::sin(meas.angle));
  const int a0 = 2 * meas.mode;
  const Eigen::Matrix2d A = state.cov.block<2, 2>(a0, a0);
  const double var = n.dot(A * n);
  if (var < kHomodyneTol) throw SingularMeasurement("homodyne_update: measured quadrature has zero variance");

  const std::vector<int> idx = quad_indices(other_modes(state.n_modes, meas.mode));
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Mat B(m, m);
  Eigen::MatrixXd C(2, m);  // Cov(measured, rest)
  Vec mb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    mb(i) = state.mean(idx[i]);
    C(0, i) = state.cov(a0, idx[i]);
    C(1, i) = state.cov(a0 + 1, idx[i]);
    for (Eigen::Index j = 0; j < m; ++j) B(i, j) = state.cov(idx[i], idx[j]);
  }
  // (Pi A Pi)^MP = n n^T / var for the rank-one projector.
  const Vec k = C.transpose() * n;
  const double residual = meas.outcome - n.dot(state.mean.segment<2>(a0));
  GaussianState out;
  out.n_modes = state.n_modes - 1;
  out.cov = B - k * k.transpose() / var;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.mean = mb + k * (residual / var);
  return out;
}

GaussianState general_dyne_update(const GaussianState& state, int mode, const Eigen::Matrix2d& sigma_meas,
                                  const Eigen::Vector2d& outcome) {
  require_mode(mode, state.n_modes, "general_dyne_update");
  if (state.n_modes < 2) throw InvalidArgument("general_dyne_update: nothing left after measuring the only mode");
  const int a0 = 2 * mode;
  const Eigen::Matrix2d S = state.cov.block<2, 2>(a0, a0) + sigma_meas;
  Eigen::FullPivLU<Eigen::Matrix2d> lu(S);
  if (!lu.isInvertible() || std::abs(S.determinant()) < kHomodyneTol)
    throw SingularMeasurement("general_dyne_update: singular measured block");
  const std::vector<int> idx = quad_indices(other_modes(state.n_modes, mode));
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Mat B(m, m);
  Eigen::MatrixXd C(2, m);
  Vec mb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    mb(i) = state.mean(idx[i]);
    C(0, i) = state.cov(a0, idx[i]);
    C(1, i) = state.cov(a0 + 1, idx[i]);
    for (Eigen::Index j = 0; j < m; ++j) B(i, j) = state.cov(idx[i], idx[j]);
  }
  const Eigen::Matrix2d Si = S.inverse();
  GaussianState out;
  out.n_modes = state.n_modes - 1;
  out.cov = B - C.transpose() * Si * C;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.mean = mb + C.transpose() * Si * (outcome - state.mean.segment<2>(a0));
  return out;
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  const Eigen::Index da = a.cov.rows(), db = b.cov.rows();
  GaussianState out;
  out.n_modes = a.n_modes + b.n_modes;
  out.mean = Vec::Zero(da + db);
  out.mean << a.mean, b.mean;
  out.cov = Mat::Zero(da + db, da + db);
  out.cov.topLeftCorner(da, da) = a.cov;
  out.cov.bottomRightCorner(db, db) = b.cov;
  return out;
}

GaussianState partial_trace(const GaussianState& state, const std::vector<int>& keep_modes) {
  if (keep_modes.empty()) throw InvalidArgument("partial_trace: empty keep set");
  for (std::size_t i = 0; i < keep_modes.size(); ++i) {
    require_mode(keep_modes[i], state.n_modes, "partial_trace");
    for (std::size_t j = 0; j < i; ++j)
      if (keep_modes[i] == keep_modes[j]) throw InvalidArgument("partial_trace: repeated mode");
  }
  const std::vector<int> idx = quad_indices(keep_modes);
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  GaussianState out;
  out.n_modes = static_cast<int>(keep_modes.size());
  out.mean = Vec(m);
  out.cov = Mat(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.mean(i) = state.mean(idx[i]);
    for (Eigen::Index j = 0; j < m; ++j) out.cov(i, j) = state.cov(idx[i], idx[j]);
  }
  return out;
}

std::vector<double> symplectic_eigenvalues(const Mat& cov) {
  require_even_square(cov, "symplectic_eigenvalues");
  if (!is_symmetric(cov)) throw InvalidArgument("symplectic_eigenvalues: covariance is not symmetric");
  const int n = static_cast<int>(cov.rows() / 2);
  // The eigenvalues of Omega*cov come in pairs +-i nu.
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(omega(n) * cov), false);
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mags.begin(), mags.end());
  std::vector<double> nu;
  for (int k = 0; k < n; ++k) nu.push_back(0.5 * (mags[2 * k] + mags[2 * k + 1]));
  return nu;
}

namespace {

struct TwoModeInvariants {
  double det_total;
  double delta;
};

TwoModeInvariants two_mode_invariants(const Mat& cov) {
  if (cov.rows() != 4 || cov.cols() != 4) throw InvalidArgument("two-mode covariance must be 4x4");
  const Eigen::Matrix2d A = cov.block<2, 2>(0, 0);
  const Eigen::Matrix2d B = cov.block<2, 2>(2, 2);
  const Eigen::Matrix2d C = cov.block<2, 2>(0, 2);
  return {cov.determinant(), A.determinant() + B.determinant() - 2.0 * C.determinant()};
}

}  // namespace

double ppt_lambda(const Mat& cov) {
  const TwoModeInvariants t = two_mode_invariants(cov);
  return 4.0 * t.det_total - t.delta + 0.25;
}

EntanglementReport log_negativity(const Mat& cov, bool check_physical) {
  if (cov.rows() != 4 || cov.cols() != 4) throw InvalidArgument("log_negativity: expected a 4x4 covariance");
  if (!is_symmetric(cov)) throw InvalidArgument("log_negativity: covariance is not symmetric");
  if (check_physical && !is_physical(cov)) throw InvalidState("log_negativity: unphysical covariance");
  const TwoModeInvariants t = two_mode_invariants(cov);
  const double disc = std::max(0.0, t.delta * t.delta - 4.0 * t.det_total);
  const double nu2 = std::max(0.0, 0.5 * (t.delta - std::sqrt(disc)));
  EntanglementReport rep;
  rep.nu_minus = std::sqrt(nu2);
  rep.log_neg = rep.nu_minus > 0.0 ? std::max(0.0, -std::log2(2.0 * rep.nu_minus))
                                   : std::numeric_limits<double>::infinity();
  rep.ppt_lambda = 4.0 * t.det_total - t.delta + 0.25;
  return rep;
}

double purity(const Mat& cov) {
  require_even_square(cov, "purity");
  const double det = cov.determinant();
  if (!(det > 0.0)) throw InvalidState("purity: non-positive determinant");
  const double n = static_cast<double>(cov.rows() / 2);
  return 1.0 / std::sqrt(std::pow(4.0, n) * det);
}

double von_neumann_entropy(const Mat& cov) {
  require_even_square(cov, "von_neumann_entropy");
  if (!(cov.determinant() > 0.0)) throw InvalidState("von_neumann_entropy: non-positive determinant");
  double s = 0.0;
  for (double nu : symplectic_eigenvalues(cov)) {
    if (nu < 0.5 - kPhysicalTol) throw InvalidState("von_neumann_entropy: unphysical covariance");
    const double p = nu + 0.5, m = nu - 0.5;
    s += p * std::log2(p);
    if (m > 1e-300) s -= m * std::log2(m);
  }
  return s;
}

}  // namespace pom
