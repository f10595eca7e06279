#include "sgrid/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sgrid/matpower.hpp"

namespace sgrid {
namespace {

void validate_config(const ExperimentConfig& cfg, bool needs_sigma_delta) {
  if (cfg.case_path.empty()) throw std::invalid_argument("config: case_path is empty");
  if (cfg.rho_grid.empty()) throw std::invalid_argument("config: rho grid is empty");
  if (cfg.lambda_grid.empty()) throw std::invalid_argument("config: lambda grid is empty");
  if (cfg.snr_db_grid.empty()) throw std::invalid_argument("config: snr grid is empty");
  if (needs_sigma_delta && cfg.sigma_delta_sq_grid.empty()) {
    throw std::invalid_argument("config: sigma_delta_sq grid is empty");
  }
  if (cfg.mc_trials < 1000) throw std::invalid_argument("config: mc_trials < 1000");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("config: tau <= 0");
  if (cfg.perturbation_draws < 1) throw std::invalid_argument("config: perturbation_draws < 1");
  if (cfg.states_per_draw < 1000) throw std::invalid_argument("config: states_per_draw < 1000");
  for (double r : cfg.rho_grid) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("config: rho outside [0, 1)");
  }
  for (double l : cfg.lambda_grid) {
    if (!(l >= 1.0)) throw std::invalid_argument("config: lambda < 1");
  }
  for (double s : cfg.sigma_delta_sq_grid) {
    if (!(s >= 0.0)) throw std::invalid_argument("config: sigma_delta_sq < 0");
  }
}

// One matched (DC) sweep point.
SweepRow dc_row(const GridCase& grid, const MeasurementMatrix& h,
                const StateModel& model, const ExperimentConfig& cfg, double lambda,
                std::uint64_t point_seed) {
  SweepRow row;
  row.case_name = grid.name;
  row.rho = model.rho;
  row.lambda = lambda;
  row.snr_db = model.snr_db;
  row.tau = cfg.tau;
  row.sigma_delta_sq = 0.0;
  row.seed = point_seed;

  AttackSpec attack = optimal_attack(h, model, lambda);
  row.mi_nats = attack.mi_under_attack;
  row.kl_nats = attack.kl_attack;

  DetectionSpectrum spec = build_spectrum(h, model, lambda, cfg.tau);
  row.pd_imhof = prob_detection(spec);

  RateEstimate rates = empirical_rates(h, model, attack, cfg.tau, cfg.mc_trials,
                                       point_seed);
  row.pd_mc = rates.p_detect;
  row.pd_mc_stderr = rates.se_detect;
  row.pfa_mc = rates.p_false_alarm;

  if (cfg.tau > 1.0) {
    BoundResult b = bound_exponent(moments(spec), cfg.tau, lambda);
    row.pd_upper_bound = b.bound;
    row.bound_t = b.t;
  } else {
    row.pd_upper_bound = 1.0;
    row.bound_t = 0.0;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_rho_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg, false);
  GridCase grid = load_case(cfg.case_path);
  MeasurementMatrix h = dc_jacobian(grid);
  std::vector<SweepRow> rows;
  std::uint64_t point = 0;
  for (double snr : cfg.snr_db_grid) {
    for (double lambda : cfg.lambda_grid) {
      for (double rho : cfg.rho_grid) {
        StateModel model = StateModel::build(h, rho, snr);
        rows.push_back(dc_row(grid, h, model, cfg, lambda,
                              mix64(cfg.master_seed ^ mix64(point))));
        ++point;
      }
    }
  }
  return rows;
}

std::vector<SweepRow> run_lambda_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg, false);
  GridCase grid = load_case(cfg.case_path);
  MeasurementMatrix h = dc_jacobian(grid);
  std::vector<SweepRow> rows;
  std::uint64_t point = 0;
  for (double snr : cfg.snr_db_grid) {
    for (double rho : cfg.rho_grid) {
      StateModel model = StateModel::build(h, rho, snr);
      for (double lambda : cfg.lambda_grid) {
        rows.push_back(dc_row(grid, h, model, cfg, lambda,
                              mix64(cfg.master_seed ^ mix64(point))));
        ++point;
      }
    }
  }
  return rows;
}

std::vector<SweepRow> run_ac_sensitivity(const ExperimentConfig& cfg) {
  validate_config(cfg, true);
  GridCase grid = load_case(cfg.case_path);
  MeasurementMatrix h0 = dc_jacobian(grid);  // true system at the nominal point
  OperatingPoint nominal = flat_start(grid);

  std::vector<SweepRow> rows;
  std::uint64_t point = 0;
  for (double snr : cfg.snr_db_grid) {
    for (double rho : cfg.rho_grid) {
      StateModel model = StateModel::build(h0, rho, snr);
      GaussianPair clean = measurement_covariances(h0, model, Eigen::MatrixXd::Zero(h0.rows(), h0.rows()));
      for (double sd2 : cfg.sigma_delta_sq_grid) {
        for (double lambda : cfg.lambda_grid) {
          const std::uint64_t point_seed = mix64(cfg.master_seed ^ mix64(point));
          double mi_sum = 0.0, kl_sum = 0.0, pd_sum = 0.0;
          long long det = 0, fal = 0;
          for (int d = 0; d < cfg.perturbation_draws; ++d) {
            Rng rng = Rng::stream(point_seed, 0xacu, static_cast<std::uint64_t>(d));
            OperatingPoint pt = perturb_point(nominal, sd2, rng);
            MeasurementMatrix h_att = ac_jacobian_at(grid, pt);
            AttackSpec attack = mismatched_attack(h0, h_att, model, lambda);
            mi_sum += attack.mi_under_attack;
            kl_sum += attack.kl_attack;
            Eigen::MatrixXd attacked = clean.cov_clean + attack.sigma_aa;
            pd_sum += prob_detection_general(attacked, clean.cov_clean, attacked,
                                             cfg.tau);
            RateEstimate r = empirical_rates(h0, model, attack, cfg.tau,
                                             cfg.states_per_draw,
                                             mix64(point_seed ^ mix64(d)));
            det += std::llround(r.p_detect * cfg.states_per_draw);
            fal += std::llround(r.p_false_alarm * cfg.states_per_draw);
          }
          const double draws = cfg.perturbation_draws;
          const double pooled = draws * cfg.states_per_draw;
          SweepRow row;
          row.case_name = grid.name;
          row.rho = rho;
          row.lambda = lambda;
          row.snr_db = snr;
          row.tau = cfg.tau;
          row.sigma_delta_sq = sd2;
          row.seed = point_seed;
          row.mi_nats = mi_sum / draws;
          row.kl_nats = kl_sum / draws;
          row.pd_imhof = pd_sum / draws;
          row.pd_mc = det / pooled;
          row.pd_mc_stderr = std::sqrt(row.pd_mc * (1.0 - row.pd_mc) / pooled);
          row.pfa_mc = fal / pooled;
          if (cfg.tau > 1.0) {
            // matched-construction bound at the nominal spectrum
            DetectionSpectrum spec = build_spectrum(h0, model, lambda, cfg.tau);
            BoundResult b = bound_exponent(moments(spec), cfg.tau, lambda);
            row.pd_upper_bound = b.bound;
            row.bound_t = b.t;
          }
          rows.push_back(std::move(row));
          ++point;
        }
      }
    }
  }
  return rows;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

constexpr const char* kHeader =
    "case,rho,lambda,snr_db,tau,sigma_delta_sq,mi_nats,kl_nats,pd_imhof,"
    "pd_mc,pd_mc_stderr,pfa_mc,pd_upper_bound,bound_t,seed";

}  // namespace

std::string csv_string(const std::vector<SweepRow>& rows) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const SweepRow& r : rows) {
    out += r.case_name;
    for (double v : {r.rho, r.lambda, r.snr_db, r.tau, r.sigma_delta_sq, r.mi_nats,
                     r.kl_nats, r.pd_imhof, r.pd_mc, r.pd_mc_stderr, r.pfa_mc,
                     r.pd_upper_bound, r.bound_t}) {
      out.push_back(',');
      out += fmt_double(v);
    }
    out.push_back(',');
    out += std::to_string(r.seed);
    out.push_back('\n');
  }
  return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << csv_string(rows);
}

std::vector<SweepRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  if (line != kHeader) throw std::runtime_error("csv: unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (toks.size() != 15) throw std::runtime_error("csv: bad row: " + line);
    SweepRow r;
    r.case_name = toks[0];
    double* fields[] = {&r.rho, &r.lambda, &r.snr_db, &r.tau, &r.sigma_delta_sq,
                        &r.mi_nats, &r.kl_nats, &r.pd_imhof, &r.pd_mc,
                        &r.pd_mc_stderr, &r.pfa_mc, &r.pd_upper_bound, &r.bound_t};
    for (int i = 0; i < 13; ++i) *fields[i] = std::stod(toks[i + 1]);
    r.seed = std::stoull(toks[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& kind,
                    const std::string& csv_path) {
  nlohmann::json j;
  j["kind"] = kind;
  j["config"] = {
      {"case_path", cfg.case_path},
      {"rho_grid", cfg.rho_grid},
      {"lambda_grid", cfg.lambda_grid},
      {"snr_db_grid", cfg.snr_db_grid},
      {"sigma_delta_sq_grid", cfg.sigma_delta_sq_grid},
      {"tau", cfg.tau},
      {"mc_trials", cfg.mc_trials},
      {"perturbation_draws", cfg.perturbation_draws},
      {"states_per_draw", cfg.states_per_draw},
  };
  j["seed"] = cfg.master_seed;
  j["versions"] = {{"stealthgrid", "0.1.0"},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%FT%TZ", std::gmtime(&now));
  j["timestamp"] = stamp;

  std::ofstream out(csv_path + ".manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest for " + csv_path);
  out << j.dump(2) << '\n';
}

bool validate_rows(const std::vector<SweepRow>& rows, std::string* violation) {
  auto fail = [&](const SweepRow& r, const std::string& what) {
    if (violation) {
      *violation = "row (case=" + r.case_name + ", rho=" + fmt_double(r.rho) +
                   ", lambda=" + fmt_double(r.lambda) +
                   ", snr=" + fmt_double(r.snr_db) +
                   ", sd2=" + fmt_double(r.sigma_delta_sq) + "): " + what;
    }
    return false;
  };
  for (const SweepRow& r : rows) {
    for (double p : {r.pd_imhof, r.pd_mc, r.pfa_mc, r.pd_upper_bound}) {
      if (!(p >= 0.0 && p <= 1.0)) return fail(r, "probability outside [0, 1]");
    }
    if (r.tau > 1.0 && r.lambda >= 1.0 && r.sigma_delta_sq == 0.0) {
      // 1e-9 covers the quadrature floor when both sides are numerically zero
      if (r.pd_imhof > r.pd_upper_bound + 3.0 * r.pd_mc_stderr + 1e-9) {
        return fail(r, "detection probability exceeds its upper bound");
      }
    }
  }
  return true;
}

}  // namespace sgrid
