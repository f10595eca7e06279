#ifndef SGRID_GAUSSIAN_HPP
#define SGRID_GAUSSIAN_HPP

#include <Eigen/Dense>
#include <vector>

#include "sgrid/jacobian.hpp"
#include "sgrid/rng.hpp"

namespace sgrid {

// Stochastic description of the grid: state covariance, measurement noise.
struct StateModel {
  Eigen::MatrixXd sigma_xx;  // n x n, symmetric positive definite
  double rho = 0.0;          // Toeplitz decay parameter of sigma_xx
  double noise_var = 0.0;    // sigma^2, per-unit^2
  double snr_db = 0.0;       // SNR used to derive noise_var

  static StateModel build(const MeasurementMatrix& h, double rho, double snr_db);
};

// Clean / attacked measurement covariances plus the state-measurement
// cross covariance Sigma_XX H^T.
struct GaussianPair {
  Eigen::MatrixXd cov_clean;     // H Sigma_XX H^T + sigma^2 I
  Eigen::MatrixXd cov_attacked;  // cov_clean + Sigma_AA
  Eigen::MatrixXd cross_cov;     // n x m
};

// (i, j) entry rho^|i-j|. Requires 0 <= rho < 1.
Eigen::MatrixXd toeplitz_cov(int n, double rho);

// sigma^2 = tr(H Sigma H^T) / (m 10^(snr_db/10))
double noise_var_from_snr(const MeasurementMatrix& h, const Eigen::MatrixXd& sigma_xx,
                          double snr_db);

double snr_from_noise_var(const MeasurementMatrix& h, const Eigen::MatrixXd& sigma_xx,
                          double noise_var);

// D(N(0,cov_p) || N(0,cov_q)) in nats; both inputs symmetric positive definite.
double gaussian_kl(const Eigen::MatrixXd& cov_p, const Eigen::MatrixXd& cov_q);

// I(X; Y) in nats for the joint Gaussian [[cov_x, cross], [cross^T, cov_y]],
// evaluated through the Schur complement of cov_x.
double gaussian_mi(const Eigen::MatrixXd& cov_x, const Eigen::MatrixXd& cross,
                   const Eigen::MatrixXd& cov_y);

// Symmetric PSD factor F with F F^T = cov (columns only for the numerically
// positive eigenvalues; eigenvalues within -1e-8 * max of zero are clamped).
Eigen::MatrixXd mvn_factor(const Eigen::MatrixXd& cov);

std::vector<Eigen::VectorXd> sample_mvn(const Eigen::MatrixXd& cov, int count,
                                        Rng& rng);

// log det of a symmetric positive-definite matrix via Cholesky.
double logdet_spd(const Eigen::MatrixXd& a);

GaussianPair measurement_covariances(const MeasurementMatrix& h, const StateModel& model,
                                     const Eigen::MatrixXd& sigma_aa);

}  // namespace sgrid

#endif
