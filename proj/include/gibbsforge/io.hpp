#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gibbsforge/errors.hpp"

namespace gibbsforge {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double; non-finite
/// values become "inf", "-inf", "nan".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::invalid_parameter, "not a number: '" + s + "'");
  }
  return v;
}

/// JSON value for a double; non-finite values are written as strings.
inline Json json_number(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json(format_number(v));
}

inline Json json_numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// CSV with '# key=value' metadata lines, then a header row, LF endings.
class CsvWriter {
 public:
  CsvWriter(const Metadata& meta, const std::vector<std::string>& header) {
    for (const auto& [k, v] : meta) out_ << "# " << k << '=' << v << '\n';
    write_row(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    write_row(cells);
  }

  std::string str() const { return out_.str(); }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::invalid_parameter, "cannot write " + path);
    f << out_.str();
  }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  std::ostringstream out_;
};

struct CsvTable {
  Metadata meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorKind::invalid_parameter, "no column '" + name + "'");
  }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::invalid_parameter, "cannot read " + path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (line.rfind("# ", 0) == 0) {
      auto eq = line.find('=');
      t.meta.emplace_back(line.substr(2, eq - 2), eq == std::string::npos ? "" : line.substr(eq + 1));
      continue;
    }
    if (line.empty()) continue;
    if (!have_header) {
      t.header = split(line, ',');
      have_header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(parse_number(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::invalid_parameter, "cannot write " + path);
  f << j.dump(2) << '\n';
}

inline Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::invalid_parameter, "cannot read " + path);
  return Json::parse(f);
}

/// Reads a JSON number written by json_number (possibly "inf").
inline double json_to_double(const Json& j) {
  if (j.is_string()) return parse_number(j.get<std::string>());
  return j.get<double>();
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
  std::string map_name;
  std::vector<double> map_params;
  std::string potential_name = "zero";
  std::vector<double> potential_params;

  std::string experiment = "analyze";
  std::size_t grid_n = 1024;
  std::string grid_kind = "auto";
  std::optional<double> sigma;  // nullopt = auto
  double gamma = 0.9;
  std::optional<double> c;
  std::optional<double> delta;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::vector<double> sweep;
  std::string sweep_target = "map";  // map | potential
  std::size_t sweep_index = 0;
  std::optional<double> sweep_base;
  long samples = 10000;
  long n_max = 60;
  long orbit_length = 10000;
  double tol = 1e-10;
  long max_iter = 100000;
  std::string noise = "conformal";
  std::string scheme = "averaged";
  bool enforce_hypotheses = true;
  bool timestamp = false;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"analyze",  "equilibrium", "gibbs",
                                              "hyptimes", "stat-sweep",  "stoch-sweep"};
  return names;
}

namespace detail {

[[noreturn]] inline void config_error(int line, const std::string& field, const std::string& msg) {
  std::string where = line > 0 ? "line " + std::to_string(line) : "config";
  if (!field.empty()) where += ", field '" + field + "'";
  throw Error(ErrorKind::config_parse_error, where + ": " + msg);
}

inline double config_number(const std::string& v, int line, const std::string& key) {
  try {
    return parse_number(v);
  } catch (const Error&) {
    config_error(line, key, "expected a decimal number, got '" + v + "'");
  }
}

inline long config_integer(const std::string& v, int line, const std::string& key) {
  long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    config_error(line, key, "expected an integer, got '" + v + "'");
  }
  return out;
}

inline std::vector<double> config_list(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const auto& part : split(v, ',')) out.push_back(config_number(trim(part), line, key));
  return out;
}

inline std::optional<double> config_auto(const std::string& v, int line, const std::string& key) {
  if (v == "auto") return std::nullopt;
  return config_number(v, line, key);
}

inline bool config_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  config_error(line, key, "expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Parses the flat config format:
///
///   [map]
///   name = pitchfork_doubling
///   params = 0.8, 0.05
///   [potential]
///   name = zero
///   [experiment]
///   kind = equilibrium
///   grid_n = 4096
///
/// '#' and ';' start comments; lists are comma separated; sigma, c and
/// delta accept "auto".
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_map = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') detail::config_error(line, "", "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "map" && section != "potential" && section != "experiment") {
        detail::config_error(line, "", "unknown section [" + section + "]");
      }
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) detail::config_error(line, "", "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (section.empty()) detail::config_error(line, key, "key outside of any section");
    if (section == "map") {
      if (key == "name") {
        cfg.map_name = val;
        have_map = true;
      } else if (key == "params") {
        cfg.map_params = detail::config_list(val, line, key);
      } else {
        detail::config_error(line, key, "unknown key in [map]");
      }
    } else if (section == "potential") {
      if (key == "name") cfg.potential_name = val;
      else if (key == "params") cfg.potential_params = detail::config_list(val, line, key);
      else detail::config_error(line, key, "unknown key in [potential]");
    } else {
      if (key == "kind" || key == "experiment") {
        bool ok = false;
        for (const auto& n : experiment_names()) ok = ok || n == val;
        if (!ok) detail::config_error(line, key, "unknown experiment '" + val + "'");
        cfg.experiment = val;
      } else if (key == "grid_n") {
        long n = detail::config_integer(val, line, key);
        if (n < 2) detail::config_error(line, key, "grid_n must be >= 2");
        cfg.grid_n = static_cast<std::size_t>(n);
      } else if (key == "grid_kind") {
        if (val != "auto" && val != "uniform" && val != "aligned" && val != "cylinder") {
          detail::config_error(line, key, "grid_kind must be auto, uniform, aligned or cylinder");
        }
        cfg.grid_kind = val;
      } else if (key == "sigma") {
        cfg.sigma = detail::config_auto(val, line, key);
      } else if (key == "gamma") {
        cfg.gamma = detail::config_number(val, line, key);
      } else if (key == "c") {
        cfg.c = detail::config_auto(val, line, key);
      } else if (key == "delta") {
        cfg.delta = detail::config_auto(val, line, key);
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::config_integer(val, line, key));
      } else if (key == "output_dir") {
        cfg.output_dir = val;
      } else if (key == "sweep" || key == "epsilons") {
        cfg.sweep = detail::config_list(val, line, key);
      } else if (key == "sweep_target") {
        if (val != "map" && val != "potential") detail::config_error(line, key, "must be map or potential");
        cfg.sweep_target = val;
      } else if (key == "sweep_index") {
        cfg.sweep_index = static_cast<std::size_t>(detail::config_integer(val, line, key));
      } else if (key == "sweep_base") {
        cfg.sweep_base = detail::config_number(val, line, key);
      } else if (key == "samples") {
        cfg.samples = detail::config_integer(val, line, key);
      } else if (key == "n_max") {
        cfg.n_max = detail::config_integer(val, line, key);
      } else if (key == "orbit_length") {
        cfg.orbit_length = detail::config_integer(val, line, key);
        if (cfg.orbit_length < 1) detail::config_error(line, key, "must be positive");
      } else if (key == "tol") {
        cfg.tol = detail::config_number(val, line, key);
      } else if (key == "max_iter") {
        cfg.max_iter = detail::config_integer(val, line, key);
      } else if (key == "noise") {
        if (val != "conformal" && val != "lebesgue") {
          detail::config_error(line, key, "must be conformal or lebesgue");
        }
        cfg.noise = val;
      } else if (key == "scheme") {
        if (val != "averaged" && val != "collocation") {
          detail::config_error(line, key, "must be averaged or collocation");
        }
        cfg.scheme = val;
      } else if (key == "enforce_hypotheses") {
        cfg.enforce_hypotheses = detail::config_bool(val, line, key);
      } else {
        detail::config_error(line, key, "unknown key in [experiment]");
      }
    }
  }
  if (!have_map || cfg.map_name.empty()) detail::config_error(0, "map.name", "missing map name");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::config_parse_error, "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace gibbsforge
