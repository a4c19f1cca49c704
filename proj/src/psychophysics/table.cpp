#include <cstdio>
#include <sstream>

#include "illum/error.hpp"
#include "illum/psychophysics.hpp"

namespace illum {

using nlohmann::json;

namespace {

int column_of(Family family) {
  for (std::size_t c = 0; c < kTableFamilies.size(); ++c)
    if (kTableFamilies[c] == family) return static_cast<int>(c);
  throw Error(ErrorKind::parameter,
              "family " + std::string(to_string(family)) + " has no reduction table column");
}

std::string fixed2(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

ReductionTable reduction_table(const std::vector<SessionData>& sessions,
                               PsychometricFamily family) {
  struct Cell {
    int comparator = 150;
    std::vector<TrialResult> results;
  };
  std::map<std::pair<std::string, int>, Cell> pooled;
  ReductionTable table;
  for (const auto& s : sessions) {
    const int col = column_of(s.family);
    if (!table.cells.count(s.subject_id)) {
      table.subjects.push_back(s.subject_id);
      table.cells[s.subject_id] = {};
    }
    auto& cell = pooled[{s.subject_id, col}];
    if (!cell.results.empty() && cell.comparator != s.comparator_intensity)
      throw Error(ErrorKind::parameter, "sessions of " + s.subject_id + "/" +
                                            std::string(to_string(s.family)) +
                                            " use different comparator intensities");
    cell.comparator = s.comparator_intensity;
    cell.results.insert(cell.results.end(), s.results.begin(), s.results.end());
  }
  for (const auto& [key, cell] : pooled) {
    try {
      const auto fit = fit_psychometric(aggregate(cell.results), family);
      table.cells[key.first][key.second] = illusory_reduction(fit, cell.comparator).reduction;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::unfittable) throw;
    }
  }
  for (std::size_t c = 0; c < kTableFamilies.size(); ++c) {
    double sum = 0;
    int n = 0;
    for (const auto& [subject, row] : table.cells)
      if (row[c]) {
        sum += *row[c];
        ++n;
      }
    if (n > 0) table.averages[c] = sum / n;
  }
  return table;
}

std::string to_csv(const ReductionTable& table) {
  std::ostringstream out;
  out << "subject";
  for (Family f : kTableFamilies) out << ',' << to_string(f);
  out << '\n';
  for (const auto& subject : table.subjects) {
    out << subject;
    for (const auto& v : table.cells.at(subject)) out << ',' << fixed2(v);
    out << '\n';
  }
  out << "average";
  for (const auto& v : table.averages) out << ',' << fixed2(v);
  out << '\n';
  return out.str();
}

json to_json(const ReductionTable& table) {
  json columns = json::array();
  for (Family f : kTableFamilies) columns.push_back(std::string(to_string(f)));
  const auto row_json = [&](const std::array<std::optional<double>, 4>& row) {
    json r = json::object();
    for (std::size_t c = 0; c < row.size(); ++c)
      r[std::string(to_string(kTableFamilies[c]))] = row[c] ? json(*row[c]) : json(nullptr);
    return r;
  };
  json rows = json::array();
  for (const auto& subject : table.subjects) {
    json r = row_json(table.cells.at(subject));
    r["subject"] = subject;
    rows.push_back(r);
  }
  return {{"columns", columns}, {"rows", rows}, {"average", row_json(table.averages)}};
}

}  // namespace illum
