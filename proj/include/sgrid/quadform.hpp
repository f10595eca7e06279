#ifndef SGRID_QUADFORM_HPP
#define SGRID_QUADFORM_HPP

#include <stdexcept>
#include <vector>

#include "sgrid/rng.hpp"

namespace sgrid {

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double achieved_bound)
      : std::runtime_error(msg), achieved_bound_(achieved_bound) {}
  double achieved_bound() const { return achieved_bound_; }

 private:
  double achieved_bound_;
};

// Positively weighted sum of independent 1-dof chi-squared variables.
// Weights at or below 1e-12 of the largest are dropped at construction.
class QuadFormDist {
 public:
  explicit QuadFormDist(std::vector<double> weights);

  const std::vector<double>& weights() const { return weights_; }
  int size() const { return static_cast<int>(weights_.size()); }
  double trace() const { return trace_; }          // sum of weights
  double trace_sq() const { return trace_sq_; }    // sum of squared weights
  double max_weight() const { return max_weight_; }

 private:
  std::vector<double> weights_;
  double trace_ = 0.0;
  double trace_sq_ = 0.0;
  double max_weight_ = 0.0;
};

struct TailEstimate {
  double probability = 0.0;
  double std_error = 0.0;
};

// P[sum w_i u_i^2 > x] by numerical inversion of the characteristic function
// (Imhof): 1/2 + (1/pi) Int_0^inf sin(theta(u)) / (u rho(u)) du with
// theta(u) = 0.5 sum atan(w_i u) - x u / 2, rho(u) = prod (1 + w_i^2 u^2)^1/4.
// Absolute accuracy ~1e-9; throws QuadratureError if the oscillatory tail
// fails to converge.
double tail_imhof(const QuadFormDist& dist, double x);

// Empirical exceedance frequency with binomial standard error.
TailEstimate tail_montecarlo(const QuadFormDist& dist, double x, int samples,
                             Rng& rng);

// tr(D) + 2 sqrt(tr(D^2) t) + 2 ||D||_inf t; the quadratic form exceeds this
// threshold with probability at most e^-t (Laurent-Massart).
double laurent_massart_threshold(const QuadFormDist& dist, double t);

}  // namespace sgrid

#endif
