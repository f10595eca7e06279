#include "sgrid/matpower.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace sgrid {
namespace {

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') {
      in_comment = false;
      out.push_back(c);
    } else if (in_comment) {
      continue;
    } else if (c == '%') {
      in_comment = true;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// Extracts the numeric rows of `mpc.<block> = [ ... ];`.
std::vector<std::vector<double>> matrix_block(const std::string& text,
                                              const std::string& block) {
  const std::string key = "mpc." + block;
  std::size_t pos = 0;
  while (true) {
    pos = text.find(key, pos);
    if (pos == std::string::npos) {
      throw ParseError("matpower: missing block mpc." + block);
    }
    std::size_t after = pos + key.size();
    // must be followed by '=' then '[' (whitespace allowed); otherwise this
    // was a prefix of a longer name such as mpc.bus_name
    std::size_t eq = text.find_first_not_of(" \t\r\n", after);
    if (eq != std::string::npos && text[eq] == '=') {
      std::size_t open = text.find_first_not_of(" \t\r\n", eq + 1);
      if (open != std::string::npos && text[open] == '[') {
        std::size_t close = text.find(']', open);
        if (close == std::string::npos) {
          throw ParseError("matpower: unterminated mpc." + block + " block");
        }
        std::string body = text.substr(open + 1, close - open - 1);
        std::vector<std::vector<double>> rows;
        std::string row;
        std::stringstream ss(body);
        while (std::getline(ss, row, ';')) {
          std::istringstream rs(row);
          std::vector<double> vals;
          double v;
          while (rs >> v) vals.push_back(v);
          if (!rs.eof()) {
            throw ParseError("matpower: non-numeric token in mpc." + block);
          }
          if (!vals.empty()) rows.push_back(std::move(vals));
        }
        if (rows.empty()) {
          throw ParseError("matpower: empty mpc." + block + " block");
        }
        return rows;
      }
    }
    pos = after;
  }
}

double scalar_field(const std::string& text, const std::string& field,
                    double fallback) {
  std::size_t pos = text.find("mpc." + field);
  if (pos == std::string::npos) return fallback;
  pos = text.find('=', pos);
  if (pos == std::string::npos) return fallback;
  return std::strtod(text.c_str() + pos + 1, nullptr);
}

std::string function_name(const std::string& text) {
  std::size_t pos = text.find("function");
  if (pos == std::string::npos) return "";
  pos = text.find('=', pos);
  if (pos == std::string::npos) return "";
  std::size_t b = text.find_first_not_of(" \t\r\n", pos + 1);
  std::size_t e = b;
  while (e < text.size() && (std::isalnum(static_cast<unsigned char>(text[e])) ||
                             text[e] == '_')) {
    ++e;
  }
  return text.substr(b, e - b);
}

void validate(const GridCase& g) {
  if (g.buses.empty()) throw ValidationError("case has no buses");
  if (g.branches.empty()) throw ValidationError("case has no branches");

  int slack_count = 0;
  for (const Bus& b : g.buses) {
    if (b.type == BusType::slack) ++slack_count;
  }
  if (slack_count == 0) throw ValidationError("case has no slack bus");
  if (slack_count > 1) {
    throw ValidationError("case has " + std::to_string(slack_count) +
                          " slack buses, expected exactly one");
  }

  for (const Branch& br : g.branches) {
    if (br.from_bus == br.to_bus) {
      throw ValidationError("branch " + std::to_string(br.from_bus) +
                            "-" + std::to_string(br.to_bus) + " is a self loop");
    }
    if (!g.bus_index.count(br.from_bus) || !g.bus_index.count(br.to_bus)) {
      throw ValidationError("branch " + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) +
                            " references an unknown bus");
    }
    if (br.in_service && br.reactance_x <= 0.0) {
      throw ValidationError("in-service branch " + std::to_string(br.from_bus) +
                            "-" + std::to_string(br.to_bus) +
                            " has non-positive reactance");
    }
  }

  // connectivity over in-service branches
  const int n = g.n_buses();
  std::vector<std::vector<int>> adj(n);
  for (const Branch& br : g.branches) {
    if (!br.in_service) continue;
    int i = g.bus_index.at(br.from_bus);
    int j = g.bus_index.at(br.to_bus);
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<bool> seen(n, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[i]) {
      throw ValidationError("in-service grid is disconnected: bus " +
                            std::to_string(g.buses[i].id) + " is isolated");
    }
  }
}

}  // namespace

int GridCase::n_branches_in_service() const {
  int k = 0;
  for (const Branch& b : branches) {
    if (b.in_service) ++k;
  }
  return k;
}

int GridCase::index_of(int bus_id) const {
  auto it = bus_index.find(bus_id);
  if (it == bus_index.end()) {
    throw ValidationError("unknown bus id " + std::to_string(bus_id));
  }
  return it->second;
}

GridCase parse_case(std::string_view raw, std::string_view name) {
  std::string text = strip_comments(raw);

  GridCase g;
  g.name = name.empty() ? function_name(text) : std::string(name);
  g.base_mva = scalar_field(text, "baseMVA", 100.0);

  for (const auto& row : matrix_block(text, "bus")) {
    if (row.size() < 8) {
      throw ParseError("matpower: bus row has fewer than 8 columns");
    }
    Bus b;
    b.id = static_cast<int>(row[0]);
    int t = static_cast<int>(row[1]);
    if (t < 1 || t > 3) {
      throw ValidationError("bus " + std::to_string(b.id) +
                            " has unsupported type " + std::to_string(t));
    }
    b.type = static_cast<BusType>(t);
    b.voltage_magnitude = row[7];
    if (g.bus_index.count(b.id)) {
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
    }
    g.bus_index[b.id] = static_cast<int>(g.buses.size());
    if (b.type == BusType::slack) g.slack_index = static_cast<int>(g.buses.size());
    g.buses.push_back(b);
  }

  for (const auto& row : matrix_block(text, "branch")) {
    if (row.size() < 11) {
      throw ParseError("matpower: branch row has fewer than 11 columns");
    }
    Branch br;
    br.from_bus = static_cast<int>(row[0]);
    br.to_bus = static_cast<int>(row[1]);
    br.reactance_x = row[3];
    br.in_service = row[10] != 0.0;
    g.branches.push_back(br);
  }

  validate(g);
  return g;
}

GridCase load_case(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open case file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  if (auto p = stem.find_last_of("/\\"); p != std::string::npos) stem = stem.substr(p + 1);
  if (auto p = stem.rfind(".m"); p != std::string::npos) stem = stem.substr(0, p);
  GridCase g = parse_case(ss.str());
  if (g.name.empty()) g.name = stem;
  return g;
}

CaseSummary case_summary(const GridCase& grid) {
  return CaseSummary{grid.n_buses(), grid.n_branches_in_service(), grid.slack_id()};
}

}  // namespace sgrid
