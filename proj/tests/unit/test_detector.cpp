#include <doctest.h>

#include <cmath>

#include "sgrid/detector.hpp"
#include "test_support.hpp"

using namespace sgrid;
using namespace sgrid_test;

namespace {

struct ToySetup {
  GridCase grid = toy_case();
  MeasurementMatrix h = dc_jacobian(grid);
  StateModel model = StateModel::build(h, 0.0, 10.0);
};

}  // namespace

TEST_CASE("toy spectrum: rank one, weight mu/(mu + sigma^2)") {
  ToySetup s;
  DetectionSpectrum spec = build_spectrum(s.h, s.model, 2.0, 2.0);
  REQUIRE(spec.p == 1);
  CHECK(spec.delta_diag[0] == doctest::Approx(4.0 / 4.1).epsilon(1e-12));
  CHECK(spec.threshold_rhs == doctest::Approx(3.567192317177788).epsilon(1e-12));
}

TEST_CASE("weights vanish as the noise grows") {
  ToySetup s;
  StateModel loud = s.model;
  loud.noise_var = 1e9;
  DetectionSpectrum spec = build_spectrum(s.h, loud, 2.0, 2.0);
  for (double w : spec.delta_diag) CHECK(w < 1e-8);
}

TEST_CASE("spectrum rank equals the state dimension on the IEEE cases") {
  for (auto [file, n] : {std::pair{"case14.m", 13}, std::pair{"case30.m", 29},
                         std::pair{"case118.m", 117}}) {
    GridCase g = load_case(data_path(file));
    MeasurementMatrix h = dc_jacobian(g);
    StateModel model = StateModel::build(h, 0.1, 10.0);
    DetectionSpectrum spec = build_spectrum(h, model, 2.0, 2.0);
    CHECK(spec.p == n);
    for (double w : spec.delta_diag) {
      CHECK(w > 0.0);
      CHECK(w < 1.0);
    }
  }
}

TEST_CASE("toy detection probability matches the scalar Gaussian tail") {
  ToySetup s;
  DetectionSpectrum spec = build_spectrum(s.h, s.model, 2.0, 2.0);
  double pd = prob_detection(spec);
  double exact = 2.0 * (1.0 - normal_cdf(std::sqrt(spec.threshold_rhs / spec.delta_diag[0])));
  CHECK(std::abs(pd - exact) < 1e-6);
  CHECK(pd == doctest::Approx(0.0558551297662867).epsilon(1e-4));
}

TEST_CASE("tiny thresholds detect everything") {
  ToySetup s;
  DetectionSpectrum spec = build_spectrum(s.h, s.model, 2.0, 1e-9);
  CHECK(spec.threshold_rhs < 0.0);
  CHECK(prob_detection(spec) == 1.0);
}

TEST_CASE("detection probability decreases along the lambda grid") {
  GridCase g = load_case(data_path("case30.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  double prev = 1.1;
  for (int k = 0; k <= 10; ++k) {
    double lambda = static_cast<double>(1 << k);
    double pd = prob_detection(build_spectrum(h, model, lambda, 2.0));
    if (prev > 1e-9) {
      CHECK(pd < prev);
    } else {
      CHECK(pd <= prev + 1e-9);  // below the quadrature floor
    }
    prev = pd;
  }
}

TEST_CASE("lrt statistic basics") {
  ToySetup s;
  GaussianPair pair = measurement_covariances(
      s.h, s.model, 0.5 * (s.h.h * s.model.sigma_xx * s.h.h.transpose()));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(4);

  // identical covariances: log L == 0 for any y
  Rng rng(3);
  for (int k = 0; k < 5; ++k) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.gaussian();
    CHECK(lrt_statistic(y, pair.cov_clean, pair.cov_clean) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  // y = 0: log L = 0.5 log(|clean| / |attacked|) < 0 under an attack
  y.setZero();
  double at_zero = lrt_statistic(y, pair.cov_clean, pair.cov_attacked);
  CHECK(at_zero ==
        doctest::Approx(0.5 * (logdet_spd(pair.cov_clean) -
                               logdet_spd(pair.cov_attacked))).epsilon(1e-12));
  CHECK(at_zero < 0.0);
}

TEST_CASE("mean log-likelihood ratio under attack estimates the KL divergence") {
  ToySetup s;
  AttackSpec attack = optimal_attack(s.h, s.model, 2.0);
  GaussianPair pair = measurement_covariances(s.h, s.model, attack.sigma_aa);
  Rng rng(41);
  const int draws = 100000;
  Eigen::MatrixXd fa = mvn_factor(pair.cov_attacked);
  Eigen::VectorXd g(fa.cols());
  double sum = 0.0, sumsq = 0.0;
  for (int d = 0; d < draws; ++d) {
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.gaussian();
    double ll = lrt_statistic(fa * g, pair.cov_clean, pair.cov_attacked);
    sum += ll;
    sumsq += ll * ll;
  }
  double mean = sum / draws;
  double se = std::sqrt((sumsq / draws - mean * mean) / draws);
  CHECK(std::abs(mean - attack.kl_attack) <= 3.0 * se);
}

TEST_CASE("empirical rates agree with the exact detection probability") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  AttackSpec attack = optimal_attack(h, model, 2.0);
  DetectionSpectrum spec = build_spectrum(h, model, 2.0, 2.0);
  double pd = prob_detection(spec);
  RateEstimate r = empirical_rates(h, model, attack, 2.0, 20000, 707);
  CHECK(std::abs(r.p_detect - pd) <= 3.0 * r.se_detect);
  CHECK(r.p_false_alarm < r.p_detect);
}

TEST_CASE("zero attack makes detection and false alarm coincide") {
  ToySetup s;
  AttackSpec none;
  none.lambda = 1.0;
  none.sigma_aa = Eigen::MatrixXd::Zero(4, 4);
  RateEstimate r = empirical_rates(s.h, s.model, none, 2.0, 20000, 11);
  // with equal hypotheses log L == 0 < log 2, so nothing ever fires
  CHECK(r.p_detect == r.p_false_alarm);
}

TEST_CASE("empirical rates are seed-stable within Monte Carlo error") {
  ToySetup s;
  AttackSpec attack = optimal_attack(s.h, s.model, 2.0);
  RateEstimate a = empirical_rates(s.h, s.model, attack, 1.0, 50000, 1);
  RateEstimate b = empirical_rates(s.h, s.model, attack, 1.0, 50000, 2);
  double se = std::hypot(a.se_detect, b.se_detect);
  CHECK(std::abs(a.p_detect - b.p_detect) <= 3.0 * se);
  // same seed: identical to the last bit
  RateEstimate c = empirical_rates(s.h, s.model, attack, 1.0, 50000, 1);
  CHECK(a.p_detect == c.p_detect);
  CHECK(a.p_false_alarm == c.p_false_alarm);
}

TEST_CASE("general detection probability reduces to the matched lemma value") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  AttackSpec attack = optimal_attack(h, model, 2.0);
  GaussianPair pair = measurement_covariances(h, model, attack.sigma_aa);
  double matched = prob_detection(build_spectrum(h, model, 2.0, 2.0));
  double general =
      prob_detection_general(pair.cov_attacked, pair.cov_clean, pair.cov_attacked, 2.0);
  CHECK(std::abs(matched - general) < 1e-8);
}

TEST_CASE("lambda_star: toy moments recover lambda = 2") {
  SpectrumMoments m{0.9518143961927426, 0.975609756097561};
  double ls = lambda_star(m, 2.0, 0.554412014172921);
  CHECK(ls == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("lambda_star: small-t limit and monotonicity") {
  SpectrumMoments m{0.8, 0.9};
  // t -> 0: lambda* -> sqrt(tr(D^2) / (4 log tau))
  double limit = std::sqrt(m.tr_delta_sq / (4.0 * std::log(2.0)));
  CHECK(lambda_star(m, 2.0, 1e-12) == doctest::Approx(limit).epsilon(1e-5));
  double prev = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0, 8.0}) {
    double ls = lambda_star(m, 2.0, t);
    CHECK(ls > prev);
    prev = ls;
  }
  CHECK_THROWS_AS(lambda_star(m, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_star(m, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("bound_exponent: toy values at lambda = tau = 2") {
  SpectrumMoments m{0.9518143961927426, 0.975609756097561};
  BoundResult b = bound_exponent(m, 2.0, 2.0);
  // margin 2 lambda ln tau - tr(D^2)/(2 lambda) = 2.5346351
  CHECK(b.t == doctest::Approx(0.554412014172921).epsilon(1e-9));
  CHECK(b.bound == doctest::Approx(0.5744099068054273).epsilon(1e-9));
  // and it dominates the exact toy detection probability
  CHECK(b.bound >= 0.0558551297662867);
}

TEST_CASE("bound_exponent and lambda_star are mutual inverses") {
  Rng rng(53);
  for (int k = 0; k < 40; ++k) {
    SpectrumMoments m{0.1 + 3.0 * rng.uniform(), 0.1 + 0.9 * rng.uniform()};
    double tau = 1.2 + 2.0 * rng.uniform();
    double t0 = 0.05 + 4.0 * rng.uniform();
    double ls = lambda_star(m, tau, t0);
    if (ls < 1.0) continue;  // bound_exponent requires lambda >= 1
    BoundResult b = bound_exponent(m, tau, ls);
    CHECK(b.t == doctest::Approx(t0).epsilon(1e-8));
  }
}

TEST_CASE("bound_exponent degrades gracefully below lambda_star") {
  SpectrumMoments m{50.0, 0.99};  // heavy spectrum: margin < 0 at lambda = 1
  BoundResult b = bound_exponent(m, 1.5, 1.0);
  CHECK(b.t == 0.0);
  CHECK(b.bound == 1.0);
  CHECK_THROWS_AS(bound_exponent(m, 0.9, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(bound_exponent(m, 2.0, 0.5), std::invalid_argument);
}

TEST_CASE("bound is non-increasing in lambda wherever it is nonvacuous") {
  GridCase g = load_case(data_path("case30.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  SpectrumMoments m = moments(build_spectrum(h, model, 1.0, 2.0));
  double prev = 1.0 + 1e-9;
  for (int k = 0; k <= 10; ++k) {
    BoundResult b = bound_exponent(m, 2.0, static_cast<double>(1 << k));
    CHECK(b.bound <= prev);
    prev = b.bound;
  }
}

TEST_CASE("triple agreement at a single sweep point") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.5, 10.0);
  const double lambda = 4.0, tau = 2.0;
  DetectionSpectrum spec = build_spectrum(h, model, lambda, tau);
  double pd = prob_detection(spec);

  Rng rng(61);
  TailEstimate qf = tail_montecarlo(QuadFormDist(spec.delta_diag),
                                    spec.threshold_rhs, 100000, rng);
  CHECK(std::abs(qf.probability - pd) <= 3.0 * qf.std_error);

  AttackSpec attack = optimal_attack(h, model, lambda);
  RateEstimate lrt = empirical_rates(h, model, attack, tau, 100000, 909);
  CHECK(std::abs(lrt.p_detect - pd) <= 3.0 * lrt.se_detect);
  CHECK(std::abs(lrt.p_detect - qf.probability) <=
        3.0 * std::hypot(lrt.se_detect, qf.std_error));
}

TEST_CASE("laurent-massart threshold tail on an IEEE spectrum") {
  GridCase g = load_case(data_path("case14.m"));
  MeasurementMatrix h = dc_jacobian(g);
  StateModel model = StateModel::build(h, 0.1, 10.0);
  DetectionSpectrum spec = build_spectrum(h, model, 2.0, 2.0);
  QuadFormDist d(spec.delta_diag);
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    CHECK(tail_imhof(d, laurent_massart_threshold(d, t)) <= std::exp(-t));
  }
}
