#pragma once

// Gaussian-state engine. Quadratures are ordered (X1, P1, X2, P2, ...) and
// the vacuum has variance 1/2.

#include <Eigen/Dense>
#include <vector>

#include "pom/errors.hpp"

namespace pom {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kSymmetryTol = 1e-12;
constexpr double kPhysicalTol = 1e-10;
constexpr double kHomodyneTol = 1e-14;

// Block-diagonal symplectic form for n modes.
Mat omega(int n_modes);

struct GaussianState {
  int n_modes = 0;
  Vec mean;
  Mat cov;
};

GaussianState vacuum(int n_modes = 1);
GaussianState thermal(double n_bar);
// Validates shape, symmetry and physicality.
GaussianState make_state(const Vec& mean, const Mat& cov);

bool is_symmetric(const Mat& cov, double tol = kSymmetryTol);
// Smallest eigenvalue of cov + (i/2)Omega, the Robertson-Schroedinger
// uncertainty margin. Negative means unphysical.
double uncertainty_margin(const Mat& cov);
// The tolerance is relative to max(1, max|cov_ij|) so strongly squeezed or
// hot states are not rejected over rounding.
bool is_physical(const Mat& cov, double tol = kPhysicalTol);

struct SymplecticOp {
  Mat matrix;
  int n_modes() const { return static_cast<int>(matrix.rows() / 2); }
  bool is_symplectic(double tol = 1e-10) const;
};

SymplecticOp make_rotation(double theta);
SymplecticOp make_squeezer(double r);
SymplecticOp make_beamsplitter(double alpha, double beta);
SymplecticOp make_pulsed_om(double chi, int light_mode, int mech_mode, int n_modes);
SymplecticOp identity_op(int n_modes);
// Places a k-mode operation on the listed modes of an n-mode register.
SymplecticOp embed(const SymplecticOp& op, const std::vector<int>& modes, int n_modes);

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& s);
GaussianState apply_local(const GaussianState& state, const SymplecticOp& s, const std::vector<int>& modes);

// Phase-insensitive map: mean -> G^1/2 mean, cov -> G^1/2 cov G^1/2 + (1-G) env.
struct GaussianChannel {
  Vec gain;  // diagonal of G
  Mat env_cov;
};

GaussianChannel optical_loss(double eta, int mode, int n_modes);
GaussianChannel thermal_decoherence(double gain, double n_env, int mode, int n_modes);
// Gain e^{-gamma t} with t = theta / omega_m toward a bath of occupation N_bar.
GaussianChannel mechanical_decoherence(double gamma, double N_bar, double omega_m, double theta, int mode,
                                       int n_modes);

GaussianState apply_channel(const GaussianState& state, const GaussianChannel& ch);

struct HomodyneMeasurement {
  int mode = 0;
  double angle = 0.0;  // measures cos(angle) X + sin(angle) P
  double outcome = 0.0;
};

Eigen::Matrix2d homodyne_projector(double angle);

// Conditions the remaining modes on the outcome and drops the measured mode.
// The covariance update does not depend on the outcome.
GaussianState homodyne_update(const GaussianState& state, const HomodyneMeasurement& meas);

// General-dyne conditioning with measurement covariance sigma_meas on one
// mode; outcome is the 2-vector of results.
GaussianState general_dyne_update(const GaussianState& state, int mode, const Eigen::Matrix2d& sigma_meas,
                                  const Eigen::Vector2d& outcome);

GaussianState tensor(const GaussianState& a, const GaussianState& b);
GaussianState partial_trace(const GaussianState& state, const std::vector<int>& keep_modes);

// Ascending, one value per mode.
std::vector<double> symplectic_eigenvalues(const Mat& cov);

struct EntanglementReport {
  double nu_minus = 0.0;
  double log_neg = 0.0;
  double ppt_lambda = 0.0;
};

// Two-mode partial-transpose quantities. Throws InvalidState on unphysical
// input when check_physical is set; reconstructed matrices may skip it.
EntanglementReport log_negativity(const Mat& cov, bool check_physical = true);
// Lambda = 4 det(cov) - Delta + 1/4 without any validation.
double ppt_lambda(const Mat& cov);

double purity(const Mat& cov);
// Bits. Sum over symplectic eigenvalues, so any mode count works.
double von_neumann_entropy(const Mat& cov);

}  // namespace pom
