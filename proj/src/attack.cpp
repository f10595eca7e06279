#include "sgrid/attack.hpp"

#include <cmath>
#include <stdexcept>

namespace sgrid {
namespace {

void require_lambda(double lambda) {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument(
        "lambda must be >= 1; the lambda < 1 regime is unsupported");
  }
}

Eigen::MatrixXd signal_covariance(const MeasurementMatrix& h, const StateModel& model) {
  Eigen::MatrixXd g = h.h * model.sigma_xx * h.h.transpose();
  return 0.5 * (g + g.transpose()).eval();
}

}  // namespace

AttackSpec optimal_attack(const MeasurementMatrix& h, const StateModel& model,
                          double lambda) {
  require_lambda(lambda);
  AttackSpec a;
  a.lambda = lambda;
  a.sigma_aa = signal_covariance(h, model) / lambda;
  GaussianPair p = measurement_covariances(h, model, a.sigma_aa);
  a.mi_under_attack = gaussian_mi(model.sigma_xx, p.cross_cov, p.cov_attacked);
  a.kl_attack = gaussian_kl(p.cov_attacked, p.cov_clean);
  return a;
}

double mi_corollary(const MeasurementMatrix& h, const StateModel& model,
                    double lambda) {
  require_lambda(lambda);
  Eigen::MatrixXd g = signal_covariance(h, model);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& mu = es.eigenvalues();
  const double mu_max = std::max(mu.maxCoeff(), 0.0);
  double mi = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu(i) > 1e-10 * mu_max) {
      mi += 0.5 * std::log1p(mu(i) / (model.noise_var + mu(i) / lambda));
    }
  }
  return mi;
}

double objective(const Eigen::MatrixXd& sigma_aa, const MeasurementMatrix& h,
                 const StateModel& model, double lambda) {
  require_lambda(lambda);
  const auto m = h.rows();
  if (sigma_aa.rows() != m || sigma_aa.cols() != m) {
    throw std::invalid_argument("objective: sigma_aa has wrong dimensions");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_aa, Eigen::EigenvaluesOnly);
  double emax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() < -1e-8 * std::max(emax, 1e-300)) {
    throw std::invalid_argument("objective: sigma_aa is not positive semidefinite");
  }
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd cov_clean = signal_covariance(h, model) + model.noise_var * eye;
  Eigen::LLT<Eigen::MatrixXd> llt(cov_clean);
  double tr = llt.solve(sigma_aa).trace();
  return -(lambda - 1.0) * logdet_spd(cov_clean + sigma_aa) -
         logdet_spd(sigma_aa + model.noise_var * eye) + lambda * tr;
}

double stationarity_residual(const Eigen::MatrixXd& sigma_aa,
                             const MeasurementMatrix& h, const StateModel& model,
                             double lambda, int directions, std::uint64_t seed) {
  require_lambda(lambda);
  const auto m = sigma_aa.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_aa);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double emax = std::max(ev.maxCoeff(), 0.0);

  // basis of the range of sigma_aa; directions stay inside its PSD face
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-10 * std::max(emax, 1e-300)) ++r;
  }
  if (r == 0) throw std::invalid_argument("stationarity_residual: zero matrix");
  Eigen::MatrixXd basis(m, r);
  int k = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-10 * std::max(emax, 1e-300)) basis.col(k++) = es.eigenvectors().col(i);
  }

  const double eps = 1e-5 * sigma_aa.norm();
  Rng rng = Rng::stream(seed, 0xd14ec7u);
  auto is_psd = [&](const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(s, Eigen::EigenvaluesOnly);
    double mx = std::max(e2.eigenvalues().maxCoeff(), 0.0);
    return e2.eigenvalues().minCoeff() >= -1e-8 * std::max(mx, 1e-300);
  };

  double residual = 0.0;
  for (int d = 0; d < directions; ++d) {
    Eigen::MatrixXd w(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) w(i, j) = rng.gaussian();
    }
    w = 0.5 * (w + w.transpose()).eval();
    Eigen::MatrixXd v = basis * (basis.transpose() * w * basis) * basis.transpose();
    v = 0.5 * (v + v.transpose()).eval();
    double nv = v.norm();
    if (nv < 1e-14) continue;
    v /= nv;
    Eigen::MatrixXd plus = sigma_aa + eps * v;
    Eigen::MatrixXd minus = sigma_aa - eps * v;
    if (!is_psd(plus) || !is_psd(minus)) continue;
    double fp = objective(plus, h, model, lambda);
    double fm = objective(minus, h, model, lambda);
    residual = std::max(residual, std::abs(fp - fm) / (2.0 * eps));
  }
  return residual;
}

double optimality_residual(const MeasurementMatrix& h, const StateModel& model,
                           double lambda, int directions, std::uint64_t seed) {
  require_lambda(lambda);
  Eigen::MatrixXd sstar = signal_covariance(h, model) / lambda;
  return stationarity_residual(sstar, h, model, lambda, directions, seed);
}

AttackSpec mismatched_attack(const MeasurementMatrix& h_true,
                             const MeasurementMatrix& h_assumed,
                             const StateModel& model, double lambda) {
  require_lambda(lambda);
  if (h_true.rows() != h_assumed.rows() || h_true.cols() != h_assumed.cols()) {
    throw std::invalid_argument("mismatched_attack: dimension mismatch");
  }
  AttackSpec a;
  a.lambda = lambda;
  a.sigma_aa = signal_covariance(h_assumed, model) / lambda;
  GaussianPair p = measurement_covariances(h_true, model, a.sigma_aa);
  a.mi_under_attack = gaussian_mi(model.sigma_xx, p.cross_cov, p.cov_attacked);
  a.kl_attack = gaussian_kl(p.cov_attacked, p.cov_clean);
  return a;
}

}  // namespace sgrid
