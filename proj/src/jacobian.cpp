#include "sgrid/jacobian.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sgrid {
namespace {

// Shared row construction for the DC and AC forms. `coupling(i, j, x)` is the
// flow sensitivity of branch (i, j): 1/x for DC, cos(theta_i - theta_j)/x for
// the lossless AC form.
template <typename Coupling>
MeasurementMatrix build_jacobian(const GridCase& grid, Coupling coupling) {
  const int nb = grid.n_buses();
  const int nl = grid.n_branches_in_service();
  const int m = nb + 2 * nl;
  const int n = nb - 1;
  const int slack = grid.slack_index;

  MeasurementMatrix mm;
  mm.h = Eigen::MatrixXd::Zero(m, n);
  mm.row_labels.resize(m);
  mm.state_labels.reserve(n);
  for (int b = 0; b < nb; ++b) {
    if (b != slack) mm.state_labels.push_back(grid.buses[b].id);
    mm.row_labels[b] = RowLabel{MeasurementKind::injection, grid.buses[b].id, 0};
  }

  auto col = [slack](int dense) { return dense < slack ? dense : dense - 1; };
  auto add = [&](int row, int dense_bus, double v) {
    if (dense_bus != slack) mm.h(row, col(dense_bus)) += v;
  };

  int k = 0;
  for (const Branch& br : grid.branches) {
    if (!br.in_service) continue;
    if (br.reactance_x <= 0.0) {
      throw ValidationError("branch " + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) +
                            " has non-positive reactance");
    }
    const int i = grid.index_of(br.from_bus);
    const int j = grid.index_of(br.to_bus);
    const double w = coupling(i, j, br.reactance_x);
    const int fwd = nb + 2 * k;
    mm.row_labels[fwd] = RowLabel{MeasurementKind::flow_fwd, br.from_bus, br.to_bus};
    mm.row_labels[fwd + 1] = RowLabel{MeasurementKind::flow_rev, br.from_bus, br.to_bus};
    add(fwd, i, w);
    add(fwd, j, -w);
    add(fwd + 1, i, -w);
    add(fwd + 1, j, w);
    // injection rows are the signed sums of incident flow rows
    add(i, i, w);
    add(i, j, -w);
    add(j, j, w);
    add(j, i, -w);
    ++k;
  }
  return mm;
}

}  // namespace

MeasurementMatrix dc_jacobian(const GridCase& grid) {
  return build_jacobian(grid, [](int, int, double x) { return 1.0 / x; });
}

MeasurementMatrix ac_jacobian_at(const GridCase& grid, const OperatingPoint& point) {
  const int nb = grid.n_buses();
  const int slack = grid.slack_index;
  if (point.theta.size() != nb - 1) {
    throw std::invalid_argument("operating point has wrong dimension");
  }
  if (!point.theta.allFinite()) {
    throw std::invalid_argument("operating point has non-finite angles");
  }
  // full angle vector with the slack pinned at zero
  Eigen::VectorXd full = Eigen::VectorXd::Zero(nb);
  int s = 0;
  for (int b = 0; b < nb; ++b) {
    if (b != slack) full(b) = point.theta(s++);
  }
  return build_jacobian(grid, [&full](int i, int j, double x) {
    return std::cos(full(i) - full(j)) / x;
  });
}

OperatingPoint flat_start(const GridCase& grid) {
  return OperatingPoint{Eigen::VectorXd::Zero(grid.n_buses() - 1)};
}

OperatingPoint perturb_point(const OperatingPoint& point, double sigma_delta_sq,
                             Rng& rng) {
  if (!(sigma_delta_sq >= 0.0)) {
    throw std::invalid_argument("perturbation variance must be nonnegative");
  }
  OperatingPoint out = point;
  const double sd = std::sqrt(sigma_delta_sq);
  for (Eigen::Index i = 0; i < out.theta.size(); ++i) {
    out.theta(i) += sd * rng.gaussian();
  }
  return out;
}

void write_h_csv(const MeasurementMatrix& mm, std::ostream& os) {
  char buf[40];
  for (int r = 0; r < mm.rows(); ++r) {
    const RowLabel& lab = mm.row_labels[r];
    switch (lab.kind) {
      case MeasurementKind::injection: os << "inj:" << lab.bus; break;
      case MeasurementKind::flow_fwd: os << "fwd:" << lab.bus << "-" << lab.other_bus; break;
      case MeasurementKind::flow_rev: os << "rev:" << lab.bus << "-" << lab.other_bus; break;
    }
    for (int c = 0; c < mm.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12g", mm.h(r, c));
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace sgrid
