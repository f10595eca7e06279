#include "sgrid/detector.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace sgrid {
namespace {

constexpr int kChunk = 4096;

void require_tau_gt1(double tau) {
  if (!(tau > 1.0)) {
    throw std::invalid_argument("detection bound requires tau > 1");
  }
}

}  // namespace

DetectionSpectrum build_spectrum(const MeasurementMatrix& h, const StateModel& model,
                                 double lambda, double tau) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("build_spectrum: lambda < 1");
  if (!(tau > 0.0)) throw std::invalid_argument("build_spectrum: tau <= 0");

  Eigen::MatrixXd g = h.h * model.sigma_xx * h.h.transpose();
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& mu = es.eigenvalues();  // ascending
  const double mu_max = std::max(mu.maxCoeff(), 0.0);

  DetectionSpectrum spec;
  spec.tau = tau;
  spec.lambda = lambda;
  // Sigma_YY shares the eigenvectors of G, so the weight paired with mu is
  // mu / (mu + sigma^2); rank tolerance 1e-10 relative.
  for (Eigen::Index i = mu.size() - 1; i >= 0; --i) {
    if (mu(i) > 1e-10 * mu_max) {
      spec.delta_diag.push_back(mu(i) / (mu(i) + model.noise_var));
    }
  }
  spec.p = static_cast<int>(spec.delta_diag.size());
  double logdet_term = 0.0;
  for (double w : spec.delta_diag) logdet_term += std::log1p(w / lambda);
  spec.threshold_rhs = lambda * (2.0 * std::log(tau) + logdet_term);
  return spec;
}

SpectrumMoments moments(const DetectionSpectrum& spec) {
  SpectrumMoments m;
  for (double w : spec.delta_diag) {
    m.tr_delta_sq += w * w;
    m.delta_inf = std::max(m.delta_inf, w);
  }
  return m;
}

double prob_detection(const DetectionSpectrum& spec) {
  return tail_imhof(QuadFormDist(spec.delta_diag), spec.threshold_rhs);
}

double prob_detection_general(const Eigen::MatrixXd& cov_true,
                              const Eigen::MatrixXd& cov_clean,
                              const Eigen::MatrixXd& cov_attacked, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("prob_detection_general: tau <= 0");
  Eigen::LLT<Eigen::MatrixXd> llt_c(cov_clean);
  Eigen::LLT<Eigen::MatrixXd> llt_a(cov_attacked);
  Eigen::LLT<Eigen::MatrixXd> llt_t(cov_true);
  if (llt_c.info() != Eigen::Success || llt_a.info() != Eigen::Success ||
      llt_t.info() != Eigen::Success) {
    throw std::invalid_argument("prob_detection_general: covariance not PD");
  }
  const auto m = cov_true.rows();
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd diff = llt_c.solve(eye) - llt_a.solve(eye);
  Eigen::MatrixXd l = llt_t.matrixL();
  Eigen::MatrixXd q = l.transpose() * diff * l;
  q = 0.5 * (q + q.transpose()).eval();

  double logdet_c = 2.0 * llt_c.matrixLLT().diagonal().array().log().sum();
  double logdet_a = 2.0 * llt_a.matrixLLT().diagonal().array().log().sum();
  double threshold = 2.0 * std::log(tau) + logdet_a - logdet_c;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
  std::vector<double> w;
  double wmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > 1e-12 * std::max(wmax, 1e-300)) {
      w.push_back(es.eigenvalues()(i));
    }
  }
  if (w.empty()) return threshold <= 0.0 ? 1.0 : 0.0;
  return tail_imhof(QuadFormDist(w), threshold);
}

double lrt_statistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov_clean,
                     const Eigen::MatrixXd& cov_attacked) {
  if (y.size() != cov_clean.rows() || cov_clean.rows() != cov_attacked.rows()) {
    throw std::invalid_argument("lrt_statistic: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt_c(cov_clean);
  Eigen::LLT<Eigen::MatrixXd> llt_a(cov_attacked);
  if (llt_c.info() != Eigen::Success || llt_a.info() != Eigen::Success) {
    throw std::invalid_argument("lrt_statistic: covariance not PD");
  }
  double quad = y.dot(llt_c.solve(y)) - y.dot(llt_a.solve(y));
  double logdet_c = 2.0 * llt_c.matrixLLT().diagonal().array().log().sum();
  double logdet_a = 2.0 * llt_a.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (quad + logdet_c - logdet_a);
}

RateEstimate empirical_rates(const MeasurementMatrix& h_true, const StateModel& model,
                             const AttackSpec& attack, double tau, int trials,
                             std::uint64_t seed) {
  if (trials < 1000) {
    throw std::invalid_argument("empirical_rates: need at least 1000 trials");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("empirical_rates: tau <= 0");

  const auto m = h_true.rows();
  const auto n = h_true.cols();
  GaussianPair cov = measurement_covariances(h_true, model, attack.sigma_aa);

  Eigen::LLT<Eigen::MatrixXd> llt_c(cov.cov_clean);
  Eigen::LLT<Eigen::MatrixXd> llt_a(cov.cov_attacked);
  if (llt_c.info() != Eigen::Success || llt_a.info() != Eigen::Success) {
    throw std::invalid_argument("empirical_rates: covariance not PD");
  }
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd quad = llt_c.solve(eye) - llt_a.solve(eye);  // statistic kernel
  double logdet_c = 2.0 * llt_c.matrixLLT().diagonal().array().log().sum();
  double logdet_a = 2.0 * llt_a.matrixLLT().diagonal().array().log().sum();
  // decision: y^T quad y >= 2 log tau + log|attacked| - log|clean|
  const double rhs = 2.0 * std::log(tau) + logdet_a - logdet_c;

  Eigen::LLT<Eigen::MatrixXd> llt_x(model.sigma_xx);
  if (llt_x.info() != Eigen::Success) {
    throw std::invalid_argument("empirical_rates: sigma_xx not PD");
  }
  Eigen::MatrixXd lx = llt_x.matrixL();
  Eigen::MatrixXd fa = mvn_factor(attack.sigma_aa);  // m x r
  const auto r = fa.cols();
  const double sn = std::sqrt(model.noise_var);

  const int n_chunks = (trials + kChunk - 1) / kChunk;
  std::vector<long long> det_hits(n_chunks, 0), fa_hits(n_chunks, 0);

  auto run_chunk = [&](int c) {
    const int b = std::min(kChunk, trials - c * kChunk);
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    Eigen::MatrixXd gx(n, b), gz(m, b), ga(r, b);
    auto fill = [&rng](Eigen::MatrixXd& g) {
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.gaussian();
      }
    };
    // H1: y = H x + z + a
    fill(gx);
    fill(gz);
    fill(ga);
    Eigen::MatrixXd y = h_true.h * (lx * gx) + sn * gz + fa * ga;
    Eigen::RowVectorXd stat = (y.array() * (quad * y).array()).colwise().sum();
    long long d = 0;
    for (int j = 0; j < b; ++j) {
      if (stat(j) >= rhs) ++d;
    }
    det_hits[c] = d;
    // H0: y = H x + z
    fill(gx);
    fill(gz);
    y = h_true.h * (lx * gx) + sn * gz;
    stat = (y.array() * (quad * y).array()).colwise().sum();
    long long f = 0;
    for (int j = 0; j < b; ++j) {
      if (stat(j) >= rhs) ++f;
    }
    fa_hits[c] = f;
  };

  unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(), 8);
  if (workers <= 1 || n_chunks == 1) {
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned wi = 0; wi < workers; ++wi) {
      pool.emplace_back([&] {
        int c;
        while ((c = next.fetch_add(1)) < n_chunks) run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }

  long long det = 0, fal = 0;
  for (int c = 0; c < n_chunks; ++c) {  // fixed reduction order
    det += det_hits[c];
    fal += fa_hits[c];
  }
  RateEstimate est;
  est.p_detect = static_cast<double>(det) / trials;
  est.p_false_alarm = static_cast<double>(fal) / trials;
  est.se_detect = std::sqrt(est.p_detect * (1.0 - est.p_detect) / trials);
  est.se_false_alarm =
      std::sqrt(est.p_false_alarm * (1.0 - est.p_false_alarm) / trials);
  return est;
}

double lambda_star(const SpectrumMoments& m, double tau, double t) {
  require_tau_gt1(tau);
  if (!(t > 0.0)) throw std::invalid_argument("lambda_star: t must be positive");
  const double a = 2.0 * std::log(tau);
  const double b = 2.0 * std::sqrt(m.tr_delta_sq * t) + 2.0 * m.delta_inf * t;
  const double c = 0.5 * m.tr_delta_sq;
  return (b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
}

BoundResult bound_exponent(const SpectrumMoments& m, double tau, double lambda) {
  require_tau_gt1(tau);
  if (!(lambda >= 1.0)) throw std::invalid_argument("bound_exponent: lambda < 1");
  const double margin = 2.0 * lambda * std::log(tau) - m.tr_delta_sq / (2.0 * lambda);
  if (margin <= 0.0) return {0.0, 1.0};  // vacuous below lambda_star
  // 2 ||D||_inf s^2 + 2 sqrt(tr D^2) s - margin = 0, s = sqrt(t)
  const double a = 2.0 * m.delta_inf;
  const double b = 2.0 * std::sqrt(m.tr_delta_sq);
  const double s = (-b + std::sqrt(b * b + 4.0 * a * margin)) / (2.0 * a);
  return {s * s, std::exp(-s * s)};
}

}  // namespace sgrid
