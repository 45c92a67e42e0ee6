#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "avr/core/task.hpp"
#include "avr/eval/csv.hpp"

namespace avr::eval {

/// One aggregated evaluation cell. `condition` separates simulation from live
/// trials; `policy_kind` separates original (fixed-biomechanics) from revised
/// (randomized) policies.
struct MetricsRow {
  Task task = Task::feeding;
  RobotProfile profile = RobotProfile::armA;
  std::string policy_id;
  std::string condition = "simulation";
  std::string policy_kind = "original";
  int episodes = 0;
  int successes = 0;
  double mean_reward = 0.0;

  double success_rate() const { return episodes > 0 ? static_cast<double>(successes) / episodes : 0.0; }
  bool operator==(const MetricsRow&) const = default;
};

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{"task",     "robot_profile", "policy_id",   "condition",   "policy_kind",
                                             "episodes", "successes",     "mean_reward", "success_rate"};
  return cols;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const MetricsRow& r : rows) {
    os << to_string(r.task) << ',' << to_string(r.profile) << ',' << csv_escape(r.policy_id) << ','
       << csv_escape(r.condition) << ',' << csv_escape(r.policy_kind) << ',' << r.episodes << ',' << r.successes << ','
       << format_double(r.mean_reward) << ',' << format_double(r.success_rate()) << "\n";
  }
}

inline std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  const auto rows = read_csv(is);
  if (rows.empty()) throw SchemaError("metrics csv: empty");
  const auto cols = csv_columns(rows[0]);
  for (const auto& c : metrics_columns()) {
    if (!cols.count(c)) throw SchemaError("metrics csv: missing column '" + c + "'");
  }
  std::vector<MetricsRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    if (r.size() != rows[0].size()) throw SchemaError("metrics csv: row " + std::to_string(i) + " has wrong width");
    auto get = [&](const char* name) -> const std::string& { return r[cols.at(name)]; };
    MetricsRow m;
    try {
      m.task = task_from_string(get("task"));
      m.profile = profile_from_string(get("robot_profile"));
      m.policy_id = get("policy_id");
      m.condition = get("condition");
      m.policy_kind = get("policy_kind");
      m.episodes = std::stoi(get("episodes"));
      m.successes = std::stoi(get("successes"));
      m.mean_reward = std::stod(get("mean_reward"));
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw SchemaError("metrics csv: row " + std::to_string(i) + " has a malformed number");
    }
    if (m.episodes < 0 || m.successes < 0 || m.successes > m.episodes) {
      throw SchemaError("metrics csv: row " + std::to_string(i) + " has inconsistent counts");
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline void save_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("IoError", "cannot write " + path.string());
  write_metrics_csv(os, rows);
}

inline std::vector<MetricsRow> load_metrics_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("IoError", "cannot open " + path.string());
  return read_metrics_csv(is);
}

enum class TableLayout { original_vs_sim, original_vs_revised };

inline TableLayout table_layout_from_string(const std::string& s) {
  if (s == "original-vs-sim") return TableLayout::original_vs_sim;
  if (s == "original-vs-revised") return TableLayout::original_vs_revised;
  throw ValidationError("unknown layout '" + s + "' (expected original-vs-sim|original-vs-revised)");
}

class MissingCell : public Error {
 public:
  explicit MissingCell(std::vector<std::string> cells)
      : Error("MissingCell", describe(cells)), cells_(std::move(cells)) {}
  const std::vector<std::string>& cells() const { return cells_; }

 private:
  static std::string describe(const std::vector<std::string>& cells) {
    std::string s = "missing table cells:";
    for (const auto& c : cells) s += " " + c;
    return s;
  }
  std::vector<std::string> cells_;
};

struct TableCell {
  int episodes = 0;
  int successes = 0;
  double mean_reward = 0.0;
  double success_rate() const { return episodes > 0 ? static_cast<double>(successes) / episodes : 0.0; }
};

struct Table {
  std::vector<std::string> columns;  // "<profile> <key>"
  std::vector<Task> tasks;
  std::vector<std::vector<TableCell>> cells;  // [task][column]
  std::vector<double> average_success;        // per column

  static std::string cell_text(const TableCell& c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f (%.0f%%)", c.mean_reward, 100.0 * c.success_rate());
    return buf;
  }
  static std::string average_text(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "(%.0f%%)", 100.0 * rate);
    return buf;
  }

  std::vector<std::vector<std::string>> grid() const {
    std::vector<std::vector<std::string>> g;
    std::vector<std::string> head{"task"};
    head.insert(head.end(), columns.begin(), columns.end());
    g.push_back(head);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      std::vector<std::string> row{to_string(tasks[t])};
      for (const TableCell& c : cells[t]) row.push_back(cell_text(c));
      g.push_back(row);
    }
    std::vector<std::string> avg{"average success"};
    for (double a : average_success) avg.push_back(average_text(a));
    g.push_back(avg);
    return g;
  }

  std::string csv() const {
    std::ostringstream os;
    for (const auto& row : grid()) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(row[i]);
      os << "\n";
    }
    return os.str();
  }

  std::string text() const {
    const auto g = grid();
    std::vector<std::size_t> width(g[0].size(), 0);
    for (const auto& row : g) {
      for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream os;
    for (std::size_t r = 0; r < g.size(); ++r) {
      for (std::size_t i = 0; i < g[r].size(); ++i) {
        if (i) os << "  ";
        os << g[r][i] << std::string(width[i] - g[r][i].size(), ' ');
      }
      os << "\n";
      if (r == 0) {
        std::size_t total = 0;
        for (std::size_t w : width) total += w + 2;
        os << std::string(total - 2, '-') << "\n";
      }
    }
    return os.str();
  }
};

/// Builds a results grid: tasks down, robot profile x second key
/// across. The second key is the condition (original-vs-sim) or the policy
/// kind (original-vs-revised); its values come from the rows, in canonical
/// order. Rows sharing a cell are pooled by episode count.
inline Table make_table(const std::vector<MetricsRow>& rows, TableLayout layout) {
  const std::vector<std::string> canonical = layout == TableLayout::original_vs_sim
                                                 ? std::vector<std::string>{"simulation", "live"}
                                                 : std::vector<std::string>{"original", "revised"};
  auto key_of = [&](const MetricsRow& r) {
    return layout == TableLayout::original_vs_sim ? r.condition : r.policy_kind;
  };
  std::vector<std::string> keys;
  for (const auto& k : canonical) {
    for (const MetricsRow& r : rows) {
      if (key_of(r) == k) {
        keys.push_back(k);
        break;
      }
    }
  }
  for (const MetricsRow& r : rows) {
    if (std::find(canonical.begin(), canonical.end(), key_of(r)) == canonical.end()) {
      throw ValidationError("row value '" + key_of(r) + "' does not fit the requested layout");
    }
  }
  if (keys.empty()) throw MissingCell({"(no rows)"});

  Table t;
  t.tasks.assign(kAllTasks.begin(), kAllTasks.end());
  std::vector<std::pair<RobotProfile, std::string>> cols;
  for (RobotProfile p : kAllProfiles) {
    for (const auto& k : keys) {
      cols.emplace_back(p, k);
      t.columns.push_back(std::string(to_string(p)) + " " + k);
    }
  }
  t.cells.assign(t.tasks.size(), std::vector<TableCell>(cols.size()));
  std::vector<std::string> missing;
  for (std::size_t ti = 0; ti < t.tasks.size(); ++ti) {
    for (std::size_t ci = 0; ci < cols.size(); ++ci) {
      TableCell& cell = t.cells[ti][ci];
      double reward_sum = 0.0;
      for (const MetricsRow& r : rows) {
        if (r.task != t.tasks[ti] || r.profile != cols[ci].first || key_of(r) != cols[ci].second) continue;
        cell.episodes += r.episodes;
        cell.successes += r.successes;
        reward_sum += r.mean_reward * r.episodes;
      }
      if (cell.episodes == 0) {
        missing.push_back(std::string(to_string(t.tasks[ti])) + "/" + t.columns[ci]);
      } else {
        cell.mean_reward = reward_sum / cell.episodes;
      }
    }
  }
  if (!missing.empty()) throw MissingCell(missing);
  t.average_success.assign(cols.size(), 0.0);
  for (std::size_t ci = 0; ci < cols.size(); ++ci) {
    for (std::size_t ti = 0; ti < t.tasks.size(); ++ti) t.average_success[ci] += t.cells[ti][ci].success_rate();
    t.average_success[ci] /= static_cast<double>(t.tasks.size());
  }
  return t;
}

}  // namespace avr::eval
