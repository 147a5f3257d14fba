#include "tnli/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tnli::gaussian {
namespace {

void check_mode(const GaussianState& state, std::size_t mode, const char* what) {
  if (mode >= state.n_modes()) {
    throw std::invalid_argument(std::string(what) + ": mode " + std::to_string(mode) +
                                " out of range for " + std::to_string(state.n_modes()) +
                                "-mode state");
  }
}

void check_pair(const GaussianState& state, std::size_t a, std::size_t b, const char* what) {
  check_mode(state, a, what);
  check_mode(state, b, what);
  if (a == b) throw std::invalid_argument(std::string(what) + ": modes must be distinct");
}

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " +
                                std::to_string(v));
  }
}

SymplecticOp identity_op(std::size_t n_modes) {
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0 || mean_.size() % 2 != 0) {
    throw std::invalid_argument("GaussianState: mean length must be 2 * n_modes with n_modes >= 1");
  }
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw std::invalid_argument("GaussianState: covariance must be 2n x 2n");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("GaussianState: covariance is not symmetric");
  }
}

MeasurementCombination::MeasurementCombination(std::vector<double> angles,
                                               std::vector<double> weights)
    : angles_(std::move(angles)), weights_(std::move(weights)) {
  if (angles_.empty() || angles_.size() != weights_.size()) {
    throw std::invalid_argument("MeasurementCombination: need one angle and one weight per mode");
  }
  if (std::none_of(weights_.begin(), weights_.end(), [](double w) { return w != 0.0; })) {
    throw std::invalid_argument("MeasurementCombination: at least one weight must be nonzero");
  }
}

Eigen::VectorXd MeasurementCombination::observable_vector() const {
  Eigen::VectorXd g(static_cast<Eigen::Index>(2 * angles_.size()));
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    g[2 * i] = weights_[i] * std::cos(angles_[i]);
    g[2 * i + 1] = weights_[i] * std::sin(angles_[i]);
  }
  return g;
}

Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; i += 2) {
    omega(i, i + 1) = 1.0;
    omega(i + 1, i) = -1.0;
  }
  return omega;
}

double symplectic_residual(const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd omega = symplectic_form(static_cast<std::size_t>(s.rows() / 2));
  return (s.transpose() * omega * s - omega).cwiseAbs().maxCoeff();
}

SymplecticOp two_mode_squeeze_op(std::size_t n_modes, std::size_t mode_a, std::size_t mode_b,
                                 double r, double squeeze_phase) {
  SymplecticOp op = identity_op(n_modes);
  const double ch = std::cosh(r);
  const double sh = std::sinh(r);
  const double c = std::cos(squeeze_phase);
  const double s = std::sin(squeeze_phase);
  // Off-diagonal block sinh(r) * [[cos, sin], [sin, -cos]]; at phase 0 this is sinh(r) * Z.
  Eigen::Matrix2d cross;
  cross << c, s, s, -c;
  const auto a = static_cast<Eigen::Index>(2 * mode_a);
  const auto b = static_cast<Eigen::Index>(2 * mode_b);
  op.matrix.block<2, 2>(a, a) = ch * Eigen::Matrix2d::Identity();
  op.matrix.block<2, 2>(b, b) = ch * Eigen::Matrix2d::Identity();
  op.matrix.block<2, 2>(a, b) = sh * cross;
  op.matrix.block<2, 2>(b, a) = sh * cross;
  return op;
}

SymplecticOp rotation_op(std::size_t n_modes, std::size_t mode, double phi) {
  SymplecticOp op = identity_op(n_modes);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  const auto m = static_cast<Eigen::Index>(2 * mode);
  op.matrix.block<2, 2>(m, m) = rot;
  return op;
}

SymplecticOp beamsplitter_op(std::size_t n_modes, std::size_t mode_a, std::size_t mode_b,
                             double transmissivity) {
  SymplecticOp op = identity_op(n_modes);
  const double t = std::sqrt(transmissivity);
  const double r = std::sqrt(1.0 - transmissivity);
  const auto a = static_cast<Eigen::Index>(2 * mode_a);
  const auto b = static_cast<Eigen::Index>(2 * mode_b);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  op.matrix.block<2, 2>(a, a) = t * id;
  op.matrix.block<2, 2>(a, b) = r * id;
  op.matrix.block<2, 2>(b, a) = -r * id;
  op.matrix.block<2, 2>(b, b) = t * id;
  return op;
}

GaussianState apply(const GaussianState& state, const SymplecticOp& op) {
  if (op.matrix.rows() != state.mean().size() || op.matrix.cols() != state.mean().size() ||
      op.displacement.size() != state.mean().size()) {
    throw std::invalid_argument("apply: operator dimension does not match state");
  }
  Eigen::VectorXd mean = op.matrix * state.mean() + op.displacement;
  Eigen::MatrixXd cov = symmetrized(op.matrix * state.cov() * op.matrix.transpose());
  return GaussianState(std::move(mean), std::move(cov));
}

GaussianState vacuum_state(std::size_t n_modes) {
  if (n_modes == 0) throw std::invalid_argument("vacuum_state: n_modes must be >= 1");
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  return GaussianState(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
}

GaussianState displace(const GaussianState& state, std::size_t mode, std::complex<double> alpha) {
  check_mode(state, mode, "displace");
  Eigen::VectorXd mean = state.mean();
  mean[static_cast<Eigen::Index>(2 * mode)] += 2.0 * alpha.real();
  mean[static_cast<Eigen::Index>(2 * mode + 1)] += 2.0 * alpha.imag();
  return GaussianState(std::move(mean), state.cov());
}

GaussianState two_mode_squeeze(const GaussianState& state, std::size_t mode_a,
                               std::size_t mode_b, double r, double squeeze_phase) {
  check_pair(state, mode_a, mode_b, "two_mode_squeeze");
  if (!(r >= 0.0)) {
    throw std::invalid_argument("two_mode_squeeze: r must be >= 0 (fold the sign into the phase)");
  }
  return apply(state, two_mode_squeeze_op(state.n_modes(), mode_a, mode_b, r, squeeze_phase));
}

GaussianState phase_rotate(const GaussianState& state, std::size_t mode, double phi) {
  check_mode(state, mode, "phase_rotate");
  return apply(state, rotation_op(state.n_modes(), mode, phi));
}

GaussianState loss_channel(const GaussianState& state, std::size_t mode, double eta) {
  check_mode(state, mode, "loss_channel");
  check_unit_interval(eta, "loss_channel: eta");
  const auto m = static_cast<Eigen::Index>(2 * mode);
  const double g = std::sqrt(eta);
  Eigen::VectorXd mean = state.mean();
  Eigen::MatrixXd cov = state.cov();
  mean.segment<2>(m) *= g;
  cov.middleRows<2>(m) *= g;
  cov.middleCols<2>(m) *= g;
  cov.block<2, 2>(m, m) += (1.0 - eta) * Eigen::Matrix2d::Identity();
  return GaussianState(std::move(mean), symmetrized(cov));
}

GaussianState beamsplitter(const GaussianState& state, std::size_t mode_a, std::size_t mode_b,
                           double transmissivity) {
  check_pair(state, mode_a, mode_b, "beamsplitter");
  check_unit_interval(transmissivity, "beamsplitter: transmissivity");
  return apply(state, beamsplitter_op(state.n_modes(), mode_a, mode_b, transmissivity));
}

MomentPair measure_stats(const GaussianState& state, const MeasurementCombination& comb) {
  if (comb.n_modes() != state.n_modes()) {
    throw std::invalid_argument("measure_stats: combination has " +
                                std::to_string(comb.n_modes()) + " modes, state has " +
                                std::to_string(state.n_modes()));
  }
  const Eigen::VectorXd g = comb.observable_vector();
  return {g.dot(state.mean()), g.dot(state.cov() * g)};
}

double uncertainty_margin(const GaussianState& state) {
  const Eigen::MatrixXcd h = state.cov().cast<std::complex<double>>() +
                             std::complex<double>(0.0, 1.0) *
                                 symplectic_form(state.n_modes()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double mean_photon_amplitude_sq(const GaussianState& state) {
  return 0.25 * state.mean().squaredNorm();
}

}  // namespace tnli::gaussian
