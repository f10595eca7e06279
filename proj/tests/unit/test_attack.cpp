#include <doctest.h>

#include <cmath>

#include "sgrid/attack.hpp"
#include "test_support.hpp"

using namespace sgrid;
using namespace sgrid_test;

namespace {

struct ToySetup {
  GridCase grid = toy_case();
  MeasurementMatrix h = dc_jacobian(grid);
  StateModel model = StateModel::build(h, 0.0, 10.0);
};

Eigen::MatrixXd random_psd(int m, double scale, Rng& rng) {
  Eigen::MatrixXd v(m, 3);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < 3; ++j) v(i, j) = rng.gaussian();
  }
  Eigen::MatrixXd e = v * v.transpose();
  return e * (scale / e.norm());
}

}  // namespace

TEST_CASE("lambda = 1 reproduces the unweighted stealth construction") {
  ToySetup s;
  AttackSpec a = optimal_attack(s.h, s.model, 1.0);
  Eigen::MatrixXd g = s.h.h * s.model.sigma_xx * s.h.h.transpose();
  CHECK((a.sigma_aa - g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("toy attack at lambda = 2 reproduces the derived MI and KL") {
  ToySetup s;
  AttackSpec a = optimal_attack(s.h, s.model, 2.0);
  CHECK(a.mi_under_attack == doctest::Approx(0.5331757132249441).epsilon(1e-9));
  CHECK(a.kl_attack == doctest::Approx(0.0452515402898885).epsilon(1e-9));
}

TEST_CASE("huge lambda shrinks the attack and restores the clean MI") {
  ToySetup s;
  AttackSpec a = optimal_attack(s.h, s.model, 1e6);
  Eigen::MatrixXd g = s.h.h * s.model.sigma_xx * s.h.h.transpose();
  CHECK(a.sigma_aa.norm() <= 1e-6 * g.norm() + 1e-15);
  double mi_na = mi_corollary(s.h, s.model, 1e300);  // effectively no attack
  CHECK(mi_na == doctest::Approx(1.8567860333521538).epsilon(1e-9));
  CHECK(std::abs(a.mi_under_attack - mi_na) < 1e-4);
}

TEST_CASE("lambda below one is rejected everywhere") {
  ToySetup s;
  CHECK_THROWS_AS(optimal_attack(s.h, s.model, 0.99), std::invalid_argument);
  CHECK_THROWS_AS(mi_corollary(s.h, s.model, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(optimality_residual(s.h, s.model, 0.0), std::invalid_argument);
}

TEST_CASE("attack covariance scales exactly as 1/lambda") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  AttackSpec base = optimal_attack(h, model, 1.0);
  for (double lambda : {2.0, 8.0, 64.0}) {
    AttackSpec a = optimal_attack(h, model, lambda);
    CHECK((a.sigma_aa - base.sigma_aa / lambda).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("corollary MI: toy values at lambda = 1 and 2") {
  ToySetup s;
  CHECK(mi_corollary(s.h, s.model, 2.0) ==
        doctest::Approx(0.5331757132249441).epsilon(1e-10));
  // 0.5 ln(1 + 4/4.1)
  CHECK(mi_corollary(s.h, s.model, 1.0) ==
        doctest::Approx(0.3404385439840655).epsilon(1e-10));
}

TEST_CASE("MI grows with lambda and KL shrinks") {
  GridCase g = load_case(data_path("case30.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  double prev_mi = -1.0, prev_kl = 1e300;
  double mi_na = mi_corollary(h, model, 1e300);
  for (double lambda : {1.0, 2.0, 5.0, 10.0, 100.0, 1000.0}) {
    AttackSpec a = optimal_attack(h, model, lambda);
    CHECK(a.mi_under_attack > prev_mi);
    CHECK(a.kl_attack < prev_kl);
    CHECK(a.mi_under_attack < mi_na);
    prev_mi = a.mi_under_attack;
    prev_kl = a.kl_attack;
  }
}

TEST_CASE("corollary MI equals the joint-covariance MI") {
  for (const char* file : {"case14.m", "case30.m", "case118.m"}) {
    GridCase g = load_case(data_path(file));
    MeasurementMatrix h = dc_jacobian(g);
    StateModel model = StateModel::build(h, 0.1, 10.0);
    for (double lambda : {1.0, 2.0, 16.0}) {
      AttackSpec a = optimal_attack(h, model, lambda);
      CHECK(std::abs(a.mi_under_attack - mi_corollary(h, model, lambda)) < 1e-8);
    }
  }
}

TEST_CASE("objective at zero attack matches the plug-in value") {
  ToySetup s;
  const double lambda = 3.0;
  const int m = s.h.rows();
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(m, m);
  GaussianPair pair = measurement_covariances(s.h, s.model, zero);
  double expect = -(lambda - 1.0) * logdet_spd(pair.cov_clean) -
                  m * std::log(s.model.noise_var);
  CHECK(objective(zero, s.h, s.model, lambda) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("objective matches its eigenvalue assembly at the optimum") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  const int m = h.rows();
  Eigen::MatrixXd gm = h.h * model.sigma_xx * h.h.transpose();
  gm = 0.5 * (gm + gm.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm, Eigen::EigenvaluesOnly);

  for (double lambda : {1.0, 2.0}) {
    double f = objective(gm / lambda, h, model, lambda);
    double assembled = 0.0;
    const double s2 = model.noise_var;
    for (Eigen::Index i = 0; i < m; ++i) {
      double mu = std::max(es.eigenvalues()(i), 0.0);
      assembled += -(lambda - 1.0) * std::log(mu + s2 + mu / lambda) -
                   std::log(mu / lambda + s2) +
                   lambda * (mu / lambda) / (mu + s2);
    }
    CHECK(f == doctest::Approx(assembled).epsilon(1e-6));
  }
}

TEST_CASE("objective is midpoint convex") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  Eigen::MatrixXd gm = h.h * model.sigma_xx * h.h.transpose();
  double scale = gm.norm();
  Rng rng(23);
  for (double lambda : {1.0, 2.0}) {
    for (int k = 0; k < 20; ++k) {
      Eigen::MatrixXd a = random_psd(h.rows(), scale * (0.2 + rng.uniform()), rng);
      Eigen::MatrixXd b = random_psd(h.rows(), scale * (0.2 + rng.uniform()), rng);
      double lhs = objective(0.5 * (a + b), h, model, lambda);
      double rhs = 0.5 * (objective(a, h, model, lambda) + objective(b, h, model, lambda));
      CHECK(lhs <= rhs + 1e-8);
    }
  }
}

TEST_CASE("objective rejects indefinite input") {
  ToySetup s;
  Eigen::MatrixXd bad = -0.1 * Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(objective(bad, s.h, s.model, 2.0), std::invalid_argument);
}

TEST_CASE("toy construction is stationary at lambda = 1") {
  ToySetup s;
  CHECK(optimality_residual(s.h, s.model, 1.0) <= 1e-6);
}

TEST_CASE("scaling the optimum by 1.1 raises the residual by 10x or more") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  // stationarity is exact at lambda = 1, so the comparison point is clean
  Eigen::MatrixXd opt = h.h * model.sigma_xx * h.h.transpose();
  double at_opt = stationarity_residual(opt, h, model, 1.0);
  double scaled = stationarity_residual(1.1 * opt, h, model, 1.0);
  CHECK(scaled >= 10.0 * at_opt);
}

TEST_CASE("mismatched attack with matching matrices is the matched attack") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  AttackSpec matched = optimal_attack(h, model, 2.0);
  AttackSpec mis = mismatched_attack(h, h, model, 2.0);
  CHECK(mis.mi_under_attack == doctest::Approx(matched.mi_under_attack).epsilon(1e-12));
  CHECK(mis.kl_attack == doctest::Approx(matched.kl_attack).epsilon(1e-12));
  CHECK((mis.sigma_aa - matched.sigma_aa).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mismatched attack keeps the KL nonnegative") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h0 = dc_jacobian(g);
  StateModel model = StateModel::build(h0, 0.1, 20.0);
  Rng rng(37);
  OperatingPoint base = flat_start(g);
  for (int d = 0; d < 10; ++d) {
    OperatingPoint pt = perturb_point(base, 0.05, rng);
    MeasurementMatrix hp = ac_jacobian_at(g, pt);
    AttackSpec mis = mismatched_attack(h0, hp, model, 2.0);
    CHECK(mis.kl_attack >= 0.0);
  }
}

TEST_CASE("mismatched attack rejects dimension mismatches") {
  GridCase a = toy_case();
  GridCase b = load_case(data_path("case14.m"));
  MeasurementMatrix ha = dc_jacobian(a);
  MeasurementMatrix hb = dc_jacobian(b);
  StateModel model = StateModel::build(ha, 0.0, 10.0);
  CHECK_THROWS_AS(mismatched_attack(ha, hb, model, 2.0), std::invalid_argument);
}
