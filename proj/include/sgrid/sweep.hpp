#ifndef SGRID_SWEEP_HPP
#define SGRID_SWEEP_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgrid/detector.hpp"

namespace sgrid {

struct ExperimentConfig {
  std::string case_path;
  std::vector<double> rho_grid{0.1};
  std::vector<double> lambda_grid{2.0};
  std::vector<double> snr_db_grid{10.0};
  std::vector<double> sigma_delta_sq_grid;  // empty = DC only
  double tau = 2.0;
  int mc_trials = 10000;
  int perturbation_draws = 200;
  int states_per_draw = 2000;
  std::uint64_t master_seed = 1;
};

struct SweepRow {
  std::string case_name;
  double rho = 0.0;
  double lambda = 1.0;
  double snr_db = 0.0;
  double tau = 0.0;
  double sigma_delta_sq = 0.0;
  double mi_nats = 0.0;
  double kl_nats = 0.0;
  double pd_imhof = 0.0;
  double pd_mc = 0.0;
  double pd_mc_stderr = 0.0;
  double pfa_mc = 0.0;
  double pd_upper_bound = 1.0;
  double bound_t = 0.0;
  std::uint64_t seed = 0;
};

// One row per (snr, lambda, rho), rho varying fastest.
std::vector<SweepRow> run_rho_sweep(const ExperimentConfig& cfg);

// One row per (snr, rho, lambda), lambda varying fastest.
std::vector<SweepRow> run_lambda_sweep(const ExperimentConfig& cfg);

// One row per (snr, sigma_delta_sq, lambda). The grid operates at the nominal
// (flat-start) point; for each perturbation draw the attacker builds the
// covariance from the Jacobian linearized at a perturbed point. MI/KL/exact
// detection probability are averaged over draws; detection and false-alarm
// rates pool states_per_draw LRT trials per draw.
std::vector<SweepRow> run_ac_sensitivity(const ExperimentConfig& cfg);

std::string csv_string(const std::vector<SweepRow>& rows);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> parse_csv(std::istream& in);

// Writes <csv_path>.manifest.json with the resolved config, seed, versions
// and a timestamp.
void write_manifest(const ExperimentConfig& cfg, const std::string& kind,
                    const std::string& csv_path);

// Checks the per-row invariants (probabilities in range, bound dominance with
// Monte Carlo slack). Returns false and fills `violation` on failure.
bool validate_rows(const std::vector<SweepRow>& rows, std::string* violation);

}  // namespace sgrid

#endif
