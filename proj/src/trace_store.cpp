#include "uwb/trace_store.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "uwb/em_forward.hpp"

namespace uwb {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* kFixedColumns[] = {"iteration", "stage", "temperature", "log_posterior",
                               "log_likelihood"};

}  // namespace

void LevelTrace::append(const TraceRow& row) {
  if (row.values.size() != width_) throw DimensionError("trace row width mismatch");
  if (!iteration_.empty() && row.iteration <= iteration_.back())
    throw std::invalid_argument("trace iterations must increase");
  iteration_.push_back(row.iteration);
  stage_.push_back(row.stage);
  temperature_.push_back(row.temperature);
  log_posterior_.push_back(row.log_posterior);
  log_likelihood_.push_back(row.log_likelihood);
  values_.insert(values_.end(), row.values.begin(), row.values.end());
}

std::vector<std::size_t> LevelTrace::rows_in_stage(int stage) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < size(); ++i)
    if (stage == 0 || stage_[i] == stage) rows.push_back(i);
  return rows;
}

Eigen::MatrixXd LevelTrace::matrix(std::size_t first, std::size_t count, int stage) const {
  if (first + count > width_) throw DimensionError("column range out of bounds");
  const std::vector<std::size_t> rows = rows_in_stage(stage);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(count));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < count; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value(rows[r], first + c);
  return m;
}

TraceStore TraceStore::make(std::size_t layers, std::size_t gamma_size, std::size_t levels) {
  TraceStore t;
  t.columns = parameter_names(layers);
  for (std::size_t k = 1; k <= gamma_size; ++k) t.columns.push_back("gamma" + std::to_string(k));
  t.columns.push_back("sigma_v2");
  t.theta_size = 3 * layers;
  t.gamma_size = gamma_size;
  t.levels.assign(levels, LevelTrace(t.columns.size()));
  return t;
}

Eigen::MatrixXd TraceStore::theta(std::size_t level, int stage) const {
  return levels.at(level).matrix(0, theta_size, stage);
}

void TraceStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::filesystem::path file = dir / ("level_" + std::to_string(l + 1) + ".csv");
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    for (const char* c : kFixedColumns) os << c << ',';
    for (std::size_t c = 0; c < columns.size(); ++c)
      os << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    const LevelTrace& t = levels[l];
    for (std::size_t i = 0; i < t.size(); ++i) {
      os << t.iteration(i) << ',' << t.stage(i) << ',' << format_double(t.temperature(i)) << ','
         << format_double(t.log_posterior(i)) << ',' << format_double(t.log_likelihood(i));
      for (std::size_t c = 0; c < t.width(); ++c) os << ',' << format_double(t.value(i, c));
      os << '\n';
    }
    if (!os) throw std::runtime_error("failed writing " + file.string());
  }
  nlohmann::json meta = metadata;
  meta["columns"] = columns;
  meta["theta_size"] = theta_size;
  meta["gamma_size"] = gamma_size;
  meta["levels"] = levels.size();
  std::ofstream ms(dir / "metadata.json");
  if (!ms) throw std::runtime_error("cannot write metadata.json");
  ms << meta.dump(2) << '\n';
}

TraceStore TraceStore::load(const std::filesystem::path& dir) {
  std::ifstream ms(dir / "metadata.json");
  if (!ms) throw std::runtime_error("missing " + (dir / "metadata.json").string());
  nlohmann::json meta = nlohmann::json::parse(ms);
  TraceStore t;
  try {
    t.columns = meta.at("columns").get<std::vector<std::string>>();
    t.theta_size = meta.at("theta_size").get<std::size_t>();
    t.gamma_size = meta.at("gamma_size").get<std::size_t>();
    const auto n_levels = meta.at("levels").get<std::size_t>();
    t.levels.assign(n_levels, LevelTrace(t.columns.size()));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error((dir / "metadata.json").string() + ": " + e.what());
  }
  for (const char* k : {"columns", "theta_size", "gamma_size", "levels"}) meta.erase(k);
  t.metadata = meta;

  const std::size_t fixed = std::size(kFixedColumns);
  for (std::size_t l = 0; l < t.levels.size(); ++l) {
    const std::filesystem::path file = dir / ("level_" + std::to_string(l + 1) + ".csv");
    std::ifstream is(file);
    if (!is) throw std::runtime_error("missing " + file.string());
    std::string line;
    std::getline(is, line);
    const std::vector<std::string> header = split_csv(line);
    if (header.size() != fixed + t.columns.size())
      throw std::runtime_error(file.string() + ": header does not match metadata columns");
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      if (header[fixed + c] != t.columns[c])
        throw std::runtime_error(file.string() + ": unexpected column '" + header[fixed + c] +
                                 "'");
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<std::string> cells = split_csv(line);
      if (cells.size() != header.size())
        throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                                 ": wrong number of fields");
      TraceRow row;
      try {
        row.iteration = std::stol(cells[0]);
        row.stage = std::stoi(cells[1]);
        row.temperature = parse_double(cells[2]);
        row.log_posterior = parse_double(cells[3]);
        row.log_likelihood = parse_double(cells[4]);
        for (std::size_t c = fixed; c < cells.size(); ++c) row.values.push_back(parse_double(cells[c]));
      } catch (const std::exception& e) {
        throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      t.levels[l].append(row);
    }
  }
  return t;
}

}  // namespace uwb
