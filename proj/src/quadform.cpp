#include "sgrid/quadform.hpp"

#include <algorithm>
#include <cmath>

namespace sgrid {
namespace {

// 15-point Gauss-Kronrod pair on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Integrand {
  const std::vector<double>& w;
  double x;

  double theta(double u) const {
    double s = 0.0;
    for (double wi : w) s += std::atan(wi * u);
    return 0.5 * s - 0.5 * x * u;
  }
  double dtheta(double u) const {
    double s = 0.0;
    for (double wi : w) {
      double t = wi * u;
      s += wi / (1.0 + t * t);
    }
    return 0.5 * s - 0.5 * x;
  }
  double operator()(double u) const {
    if (u <= 0.0) {
      double tr = 0.0;
      for (double wi : w) tr += wi;
      return 0.5 * (tr - x);  // limit of sin(theta)/u at 0
    }
    double logrho = 0.0;
    for (double wi : w) {
      double t = wi * u;
      logrho += std::log1p(t * t);
    }
    return std::sin(theta(u)) * std::exp(-0.25 * logrho) / u;
  }
};

struct GkResult {
  double value;
  double error;
};

GkResult gk15(const Integrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  return {resk * h, std::abs(resk - resg) * h};
}

double adaptive(const Integrand& f, double a, double b, double tol, int depth) {
  GkResult r = gk15(f, a, b);
  if (r.error < tol || depth > 48) return r.value;
  double m = 0.5 * (a + b);
  return adaptive(f, a, m, 0.5 * tol, depth + 1) +
         adaptive(f, m, b, 0.5 * tol, depth + 1);
}

// Solve theta(u) = target on (lo, inf), theta strictly decreasing past lo.
double phase_root(const Integrand& f, double lo, double target, double rate) {
  double hi = lo + std::max((f.theta(lo) - target) / rate, 1e-12);
  while (f.theta(hi) > target) hi = lo + 2.0 * (hi - lo);
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double t = f.theta(u);
    if (t > target) {
      lo = u;
    } else {
      hi = u;
    }
    double d = f.dtheta(u);
    double un = d != 0.0 ? u - (t - target) / d : 0.5 * (lo + hi);
    if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
    if (std::abs(un - u) < 1e-14 * std::max(1.0, u)) return un;
    u = un;
  }
  return u;
}

}  // namespace

QuadFormDist::QuadFormDist(std::vector<double> weights) {
  if (weights.empty()) {
    throw std::invalid_argument("quadform: empty weight list");
  }
  double wmax = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("quadform: negative weight");
    wmax = std::max(wmax, w);
  }
  if (wmax <= 0.0) {
    throw std::invalid_argument("quadform: all weights are zero");
  }
  for (double w : weights) {
    if (w > 1e-12 * wmax) weights_.push_back(w);
  }
  std::sort(weights_.begin(), weights_.end(), std::greater<double>());
  max_weight_ = weights_.front();
  for (double w : weights_) {
    trace_ += w;
    trace_sq_ += w * w;
  }
}

double tail_imhof(const QuadFormDist& dist, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("tail_imhof: non-finite x");
  if (x <= 0.0) return 1.0;  // the form is positive almost surely

  const Integrand f{dist.weights(), x};
  const double tol = 1e-12;

  // Find u1 past which the phase decreases at rate >= x/4, so lobes between
  // consecutive phase multiples of pi are well defined.
  double u1 = 0.0;
  if (f.dtheta(0.0) > -0.25 * x) {
    u1 = 1.0;
    while (f.dtheta(u1) > -0.25 * x) {
      u1 *= 2.0;
      if (u1 > 1e12) throw QuadratureError("tail_imhof: phase never monotone", 1.0);
    }
  }
  double total = u1 > 0.0 ? adaptive(f, 0.0, u1, tol, 0) : 0.0;

  // Oscillatory tail: integrate lobe by lobe between roots of
  // theta(u) = -k pi and accelerate the alternating partial sums by
  // iterated averaging.
  const int max_lobes = 6000;
  const double conv_tol = 1e-11;
  std::vector<double> partial;
  partial.reserve(256);
  double sum = 0.0;
  double u_prev = u1;
  double target = std::floor(f.theta(u1) / M_PI) * M_PI;
  double lobe = 0.0;
  double prev_acc[2] = {0.0, 0.0};
  for (int k = 0; k < max_lobes; ++k) {
    double u = phase_root(f, u_prev, target, 0.25 * x);
    lobe = adaptive(f, u_prev, u, tol, 0);
    sum += lobe;
    partial.push_back(sum);

    const int kAvg = 30;
    int kk = std::min<int>(partial.size(), kAvg);
    double tbl[kAvg];
    std::copy(partial.end() - kk, partial.end(), tbl);
    for (int lev = 1; lev < kk; ++lev) {
      for (int i = 0; i < kk - lev; ++i) tbl[i] = 0.5 * (tbl[i] + tbl[i + 1]);
    }
    double acc = tbl[0];
    if (static_cast<int>(partial.size()) >= 16 &&
        std::abs(acc - prev_acc[0]) < conv_tol &&
        std::abs(acc - prev_acc[1]) < conv_tol) {
      total += acc;
      double p = 0.5 + total / M_PI;
      return std::min(std::max(p, 0.0), 1.0);
    }
    if (std::abs(lobe) < conv_tol && static_cast<int>(partial.size()) >= 4) {
      // alternating series: the remainder is bounded by the last lobe
      total += acc;
      double p = 0.5 + total / M_PI;
      return std::min(std::max(p, 0.0), 1.0);
    }
    prev_acc[1] = prev_acc[0];
    prev_acc[0] = acc;
    u_prev = u;
    target -= M_PI;
  }
  throw QuadratureError("tail_imhof: oscillatory tail did not converge",
                        std::abs(lobe));
}

TailEstimate tail_montecarlo(const QuadFormDist& dist, double x, int samples,
                             Rng& rng) {
  if (samples < 1000) {
    throw std::invalid_argument("tail_montecarlo: need at least 1000 samples");
  }
  const auto& w = dist.weights();
  long long hits = 0;
  for (int s = 0; s < samples; ++s) {
    double q = 0.0;
    for (double wi : w) {
      double g = rng.gaussian();
      q += wi * g * g;
    }
    if (q > x) ++hits;
  }
  double p = static_cast<double>(hits) / samples;
  return {p, std::sqrt(p * (1.0 - p) / samples)};
}

double laurent_massart_threshold(const QuadFormDist& dist, double t) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("laurent_massart_threshold: t must be positive");
  }
  return dist.trace() + 2.0 * std::sqrt(dist.trace_sq() * t) +
         2.0 * dist.max_weight() * t;
}

}  // namespace sgrid
