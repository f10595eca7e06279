#ifndef SGRID_MATPOWER_HPP
#define SGRID_MATPOWER_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sgrid {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BusType { pq = 1, pv = 2, slack = 3 };

struct Bus {
  int id = 0;                      // external bus number
  BusType type = BusType::pq;
  double voltage_magnitude = 1.0;  // per unit, recorded only
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double reactance_x = 0.0;  // per unit
  bool in_service = true;
};

struct GridCase {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  double base_mva = 100.0;

  std::unordered_map<int, int> bus_index;  // external id -> dense 0..n-1
  int slack_index = -1;                    // dense index of the slack bus

  int n_buses() const { return static_cast<int>(buses.size()); }
  int n_branches_in_service() const;
  int slack_id() const { return buses[slack_index].id; }
  int index_of(int bus_id) const;  // throws ValidationError on unknown id
};

struct CaseSummary {
  int n_bus = 0;
  int n_branch_in_service = 0;
  int slack_id = 0;
};

// Parses the mpc.bus / mpc.branch blocks of a MATPOWER case file.
// Consumed columns: bus 1 (id), 2 (type), 8 (Vm); branch 1, 2 (endpoints),
// 4 (reactance), 11 (status). '%' starts a comment, rows end with ';'.
GridCase parse_case(std::string_view text, std::string_view name = "");

GridCase load_case(const std::string& path);

CaseSummary case_summary(const GridCase& grid);

}  // namespace sgrid

#endif
