#ifndef SGRID_JACOBIAN_HPP
#define SGRID_JACOBIAN_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "sgrid/matpower.hpp"
#include "sgrid/rng.hpp"

namespace sgrid {

enum class MeasurementKind { injection, flow_fwd, flow_rev };

struct RowLabel {
  MeasurementKind kind = MeasurementKind::injection;
  int bus = 0;       // external bus id (injection) or branch from-bus (flows)
  int other_bus = 0; // branch to-bus for flows, unused for injections
};

// Linearized measurement matrix: m = n_bus + 2 * n_branch_in_service rows
// (injections in dense bus order, then per branch flow_fwd/flow_rev in file
// order), n = n_bus - 1 columns (slack angle fixed at zero and dropped).
struct MeasurementMatrix {
  Eigen::MatrixXd h;
  std::vector<RowLabel> row_labels;
  std::vector<int> state_labels;  // external ids of non-slack buses, dense order

  int rows() const { return static_cast<int>(h.rows()); }
  int cols() const { return static_cast<int>(h.cols()); }
};

// Voltage angles (radians) of the non-slack buses in dense order.
struct OperatingPoint {
  Eigen::VectorXd theta;
};

MeasurementMatrix dc_jacobian(const GridCase& grid);

// Lossless AC form at an operating point (r = 0, V = 1 pu): branch flow
// sensitivity cos(theta_i - theta_j) / x. Reduces to dc_jacobian at theta = 0.
MeasurementMatrix ac_jacobian_at(const GridCase& grid, const OperatingPoint& point);

OperatingPoint flat_start(const GridCase& grid);

OperatingPoint perturb_point(const OperatingPoint& point, double sigma_delta_sq,
                             Rng& rng);

// Debug dump: one line per row, "label,v1,...,vn".
void write_h_csv(const MeasurementMatrix& mm, std::ostream& os);

}  // namespace sgrid

#endif
