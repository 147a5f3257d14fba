#pragma once

// Gaussian-state algebra over n optical modes.
//
// Conventions (fixed for the whole library):
//   x = a + a^dagger,  p = -i (a - a^dagger),  vacuum variance 1 per quadrature.
//   Phase-space vectors are interleaved: (x_1, p_1, x_2, p_2, ...).
//   Omega is block-diagonal [[0, 1], [-1, 0]] per mode.
//
// Every operation is a pure function returning a new state.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace tnli::gaussian {

class GaussianState {
 public:
  /// Throws std::invalid_argument on size mismatch or an asymmetric covariance.
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size() / 2); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// Affine symplectic map q -> S q + d.
struct SymplecticOp {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd displacement;
};

/// Homodyne observable M = sum_i w_i (x_i cos theta_i + p_i sin theta_i).
class MeasurementCombination {
 public:
  MeasurementCombination(std::vector<double> angles, std::vector<double> weights);

  std::size_t n_modes() const { return angles_.size(); }
  const std::vector<double>& angles() const { return angles_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Phase-space projection vector g with M = g . q.
  Eigen::VectorXd observable_vector() const;

 private:
  std::vector<double> angles_;
  std::vector<double> weights_;
};

struct MomentPair {
  double mean;
  double variance;
};

Eigen::MatrixXd symplectic_form(std::size_t n_modes);

/// max |S^T Omega S - Omega|.
double symplectic_residual(const Eigen::MatrixXd& s);

// Elementary symplectic generators on an n-mode register.
SymplecticOp two_mode_squeeze_op(std::size_t n_modes, std::size_t mode_a, std::size_t mode_b,
                                 double r, double squeeze_phase);
SymplecticOp rotation_op(std::size_t n_modes, std::size_t mode, double phi);
SymplecticOp beamsplitter_op(std::size_t n_modes, std::size_t mode_a, std::size_t mode_b,
                             double transmissivity);

GaussianState apply(const GaussianState& state, const SymplecticOp& op);

GaussianState vacuum_state(std::size_t n_modes);
GaussianState displace(const GaussianState& state, std::size_t mode, std::complex<double> alpha);

/// Two-mode squeezer. With squeeze_phase = 0 the joint quadratures x_a - x_b and
/// p_a + p_b are squeezed: Cov(x_a, x_b) = +sinh 2r, Cov(p_a, p_b) = -sinh 2r.
GaussianState two_mode_squeeze(const GaussianState& state, std::size_t mode_a,
                               std::size_t mode_b, double r, double squeeze_phase);

/// a -> a e^{i phi}. Homodyning the result at theta equals homodyning the
/// input at theta - phi.
GaussianState phase_rotate(const GaussianState& state, std::size_t mode, double phi);

/// Pure-loss channel of transmissivity eta: V -> eta V + (1 - eta), mean -> sqrt(eta) mean.
GaussianState loss_channel(const GaussianState& state, std::size_t mode, double eta);

/// a' = sqrt(T) a + sqrt(1-T) b,  b' = -sqrt(1-T) a + sqrt(T) b.
GaussianState beamsplitter(const GaussianState& state, std::size_t mode_a, std::size_t mode_b,
                           double transmissivity);

MomentPair measure_stats(const GaussianState& state, const MeasurementCombination& comb);

/// Smallest eigenvalue of the Hermitian matrix cov + i Omega; >= 0 for physical states.
double uncertainty_margin(const GaussianState& state);

/// Sum over modes of the squared mean amplitude |alpha_i|^2 = (x_i^2 + p_i^2) / 4.
double mean_photon_amplitude_sq(const GaussianState& state);

}  // namespace tnli::gaussian
