#ifndef SGRID_ATTACK_HPP
#define SGRID_ATTACK_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "sgrid/gaussian.hpp"
#include "sgrid/jacobian.hpp"

namespace sgrid {

// Gaussian attack with covariance Sigma_AA = (1/lambda) H Sigma_XX H^T and
// the information measures it induces. lambda >= 1 trades detectability
// against the information the operator retains.
struct AttackSpec {
  double lambda = 1.0;
  Eigen::MatrixXd sigma_aa;
  double mi_under_attack = 0.0;  // I(X; Y_A), nats
  double kl_attack = 0.0;        // D(P_attacked || P_clean), nats
};

AttackSpec optimal_attack(const MeasurementMatrix& h, const StateModel& model,
                          double lambda);

// I(X; Y_A) under the optimal attack via the eigenvalues of H Sigma_XX H^T:
// 0.5 sum log(1 + mu_i / (sigma^2 + mu_i / lambda)). Independent route from
// gaussian_mi for cross-checking.
double mi_corollary(const MeasurementMatrix& h, const StateModel& model,
                    double lambda);

// Attack-construction cost
//   -(lambda-1) log|Sigma_YY + S| - log|S + sigma^2 I| + lambda tr(Sigma_YY^-1 S)
// evaluated at a symmetric PSD S. Convex on the PSD cone for lambda >= 1.
double objective(const Eigen::MatrixXd& sigma_aa, const MeasurementMatrix& h,
                 const StateModel& model, double lambda);

// Max |central finite difference| of the objective over random symmetric unit
// directions confined to the range of sigma_aa (directions leaving the PSD
// cone on either side are skipped). Step 1e-5 * ||sigma_aa||_F.
double stationarity_residual(const Eigen::MatrixXd& sigma_aa,
                             const MeasurementMatrix& h, const StateModel& model,
                             double lambda, int directions = 50,
                             std::uint64_t seed = 0x5eedu);

// stationarity_residual at the closed-form construction.
double optimality_residual(const MeasurementMatrix& h, const StateModel& model,
                           double lambda, int directions = 50,
                           std::uint64_t seed = 0x5eedu);

// Attack covariance built from h_assumed, information measures evaluated
// against the true measurement distribution generated by h_true.
AttackSpec mismatched_attack(const MeasurementMatrix& h_true,
                             const MeasurementMatrix& h_assumed,
                             const StateModel& model, double lambda);

}  // namespace sgrid

#endif
