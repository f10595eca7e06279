#include "sgrid/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace sgrid {
namespace {

void require_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
}

void require_symmetric(const Eigen::MatrixXd& a, const char* what) {
  require_square(a, what);
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
}

Eigen::LLT<Eigen::MatrixXd> llt_of(const Eigen::MatrixXd& a, const char* what) {
  require_symmetric(a, what);
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(what) +
                                ": matrix is not positive definite");
  }
  return llt;
}

}  // namespace

double logdet_spd(const Eigen::MatrixXd& a) {
  auto llt = llt_of(a, "logdet");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd toeplitz_cov(int n, double rho) {
  if (n < 1) throw std::invalid_argument("toeplitz_cov: n must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("toeplitz_cov: rho must lie in [0, 1)");
  }
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      s(i, j) = std::pow(rho, std::abs(i - j));
    }
  }
  return s;
}

double noise_var_from_snr(const MeasurementMatrix& h, const Eigen::MatrixXd& sigma_xx,
                          double snr_db) {
  if (h.cols() != sigma_xx.rows() || sigma_xx.rows() != sigma_xx.cols()) {
    throw std::invalid_argument("noise_var_from_snr: dimension mismatch");
  }
  double tr = (h.h * sigma_xx * h.h.transpose()).trace();
  if (!std::isfinite(tr)) {
    throw std::invalid_argument("noise_var_from_snr: non-finite signal power");
  }
  return tr / (h.rows() * std::pow(10.0, snr_db / 10.0));
}

double snr_from_noise_var(const MeasurementMatrix& h, const Eigen::MatrixXd& sigma_xx,
                          double noise_var) {
  double tr = (h.h * sigma_xx * h.h.transpose()).trace();
  return 10.0 * std::log10(tr / (h.rows() * noise_var));
}

StateModel StateModel::build(const MeasurementMatrix& h, double rho, double snr_db) {
  StateModel m;
  m.sigma_xx = toeplitz_cov(h.cols(), rho);
  m.rho = rho;
  m.snr_db = snr_db;
  m.noise_var = noise_var_from_snr(h, m.sigma_xx, snr_db);
  return m;
}

double gaussian_kl(const Eigen::MatrixXd& cov_p, const Eigen::MatrixXd& cov_q) {
  if (cov_p.rows() != cov_q.rows() || cov_p.cols() != cov_q.cols()) {
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  }
  const auto m = cov_p.rows();
  auto llt_q = llt_of(cov_q, "gaussian_kl cov_q");
  auto llt_p = llt_of(cov_p, "gaussian_kl cov_p");
  double logdet_q = 2.0 * llt_q.matrixLLT().diagonal().array().log().sum();
  double logdet_p = 2.0 * llt_p.matrixLLT().diagonal().array().log().sum();
  double tr = llt_q.solve(cov_p).trace();
  return 0.5 * (logdet_q - logdet_p - static_cast<double>(m) + tr);
}

double gaussian_mi(const Eigen::MatrixXd& cov_x, const Eigen::MatrixXd& cross,
                   const Eigen::MatrixXd& cov_y) {
  if (cross.rows() != cov_x.rows() || cross.cols() != cov_y.rows()) {
    throw std::invalid_argument("gaussian_mi: dimension mismatch");
  }
  auto llt_x = llt_of(cov_x, "gaussian_mi cov_x");
  Eigen::MatrixXd schur = cov_y - cross.transpose() * llt_x.solve(cross);
  return 0.5 * (logdet_spd(cov_y) - logdet_spd(schur));
}

Eigen::MatrixXd mvn_factor(const Eigen::MatrixXd& cov) {
  require_symmetric(cov, "mvn_factor");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("mvn_factor: eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  double emax = std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() < -1e-8 * std::max(emax, 1e-300)) {
    throw std::invalid_argument("mvn_factor: matrix is not positive semidefinite");
  }
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 0.0) ++r;
  }
  Eigen::MatrixXd f(cov.rows(), std::max(r, 1));
  f.setZero();
  int k = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 0.0) {
      f.col(k++) = es.eigenvectors().col(i) * std::sqrt(ev(i));
    }
  }
  return f;
}

std::vector<Eigen::VectorXd> sample_mvn(const Eigen::MatrixXd& cov, int count,
                                        Rng& rng) {
  Eigen::MatrixXd f = mvn_factor(cov);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  Eigen::VectorXd g(f.cols());
  for (int s = 0; s < count; ++s) {
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.gaussian();
    out.push_back(f * g);
  }
  return out;
}

GaussianPair measurement_covariances(const MeasurementMatrix& h, const StateModel& model,
                                     const Eigen::MatrixXd& sigma_aa) {
  const auto m = h.rows();
  GaussianPair p;
  Eigen::MatrixXd g = h.h * model.sigma_xx * h.h.transpose();
  g = 0.5 * (g + g.transpose()).eval();
  p.cov_clean = g + model.noise_var * Eigen::MatrixXd::Identity(m, m);
  p.cov_attacked = p.cov_clean + sigma_aa;
  p.cross_cov = model.sigma_xx * h.h.transpose();
  return p;
}

}  // namespace sgrid
