#ifndef SGRID_DETECTOR_HPP
#define SGRID_DETECTOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sgrid/attack.hpp"
#include "sgrid/gaussian.hpp"
#include "sgrid/quadform.hpp"

namespace sgrid {

// Everything the exact detection probability needs: the diagonal weights
// mu_i / (mu_i + sigma^2) paired through the shared eigenvectors of
// H Sigma_XX H^T and Sigma_YY, and the LRT exceedance threshold
// lambda (2 log tau + log|I + Delta / lambda|).
struct DetectionSpectrum {
  std::vector<double> delta_diag;  // descending, each in (0, 1)
  int p = 0;                       // rank of H Sigma_XX H^T
  double tau = 0.0;
  double lambda = 1.0;
  double threshold_rhs = 0.0;
};

struct SpectrumMoments {
  double tr_delta_sq = 0.0;  // tr(Delta^2)
  double delta_inf = 0.0;    // ||Delta||_inf
};

struct RateEstimate {
  double p_detect = 0.0;
  double p_false_alarm = 0.0;
  double se_detect = 0.0;
  double se_false_alarm = 0.0;
};

struct BoundResult {
  double t = 0.0;
  double bound = 1.0;
};

DetectionSpectrum build_spectrum(const MeasurementMatrix& h, const StateModel& model,
                                 double lambda, double tau);

SpectrumMoments moments(const DetectionSpectrum& spec);

// P[(U^p)^T Delta U^p >= threshold_rhs] via tail_imhof.
double prob_detection(const DetectionSpectrum& spec);

// Exact LRT exceedance probability when samples follow N(0, cov_true) and the
// test compares N(0, cov_attacked) against N(0, cov_clean) at threshold tau.
// Covers the mismatched case; equals prob_detection when cov_true equals
// cov_attacked built from the matched construction.
double prob_detection_general(const Eigen::MatrixXd& cov_true,
                              const Eigen::MatrixXd& cov_clean,
                              const Eigen::MatrixXd& cov_attacked, double tau);

// log L(y) = 0.5 (y^T (clean^-1 - attacked^-1) y + log|clean| - log|attacked|)
double lrt_statistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov_clean,
                     const Eigen::MatrixXd& cov_attacked);

// Monte Carlo detection / false-alarm rates of the LRT. Samples x, z, a
// separately under H1 (and x, z under H0); trials are processed in fixed-size
// chunks with one derived RNG stream per chunk, so the result does not depend
// on the number of worker threads.
RateEstimate empirical_rates(const MeasurementMatrix& h_true, const StateModel& model,
                             const AttackSpec& attack, double tau, int trials,
                             std::uint64_t seed);

// Positive root of 2 lambda log tau - tr(D^2)/(2 lambda)
//                      - 2 sqrt(tr(D^2) t) - 2 ||D||_inf t = 0.
// Attacks with lambda >= max(lambda_star(t), 1) are detected with probability
// at most e^-t.
double lambda_star(const SpectrumMoments& m, double tau, double t);

// Largest exponent t certified for a given lambda, and the bound e^-t.
// Returns {0, 1} when 2 lambda log tau <= tr(D^2)/(2 lambda) (vacuous).
BoundResult bound_exponent(const SpectrumMoments& m, double tau, double lambda);

}  // namespace sgrid

#endif
