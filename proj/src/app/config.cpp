#include "frohlich/app.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace frohlich::app {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key \"" + key + "\"");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) throw ConfigError(path, "must be positive");
  return x;
}

int integer(const json& v, const std::string& path, int lo) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > 1'000'000) throw ConfigError(path, "out of range");
  return static_cast<int>(x);
}

const json& required(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key, "missing required key");
  return *it;
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected a list of 3 numbers");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]"), number(v[2], path + "[2]")};
}

Format parse_format(const json& v, const std::string& path) {
  if (v == "json") return Format::json;
  if (v == "csv") return Format::csv;
  throw ConfigError(path, "expected \"json\" or \"csv\"");
}

std::string string_value(const json& v, const std::string& path) {
  if (!v.is_string() || v.get<std::string>().empty()) throw ConfigError(path, "expected a nonempty string");
  return v.get<std::string>();
}

ModelConfig parse_model(const json& j) {
  reject_unknown(j, "model", {"alpha", "lambda_max", "n_shells", "n_dirs", "r_min", "n_max", "repulsive"});
  ModelConfig m;
  m.alpha = number(required(j, "alpha", "model"), "model.alpha");
  if (m.alpha < 0.0) throw ConfigError("model.alpha", "must be nonnegative");
  m.lambda_max = positive(required(j, "lambda_max", "model"), "model.lambda_max");
  m.n_shells = integer(required(j, "n_shells", "model"), "model.n_shells", 1);
  m.n_dirs = integer(required(j, "n_dirs", "model"), "model.n_dirs", 1);
  if (m.n_dirs != 1 && m.n_dirs != 6 && m.n_dirs != 14) throw ConfigError("model.n_dirs", "must be 1, 6 or 14");
  m.r_min = positive(required(j, "r_min", "model"), "model.r_min");
  if (!(m.r_min < m.lambda_max)) throw ConfigError("model.r_min", "must be below lambda_max");
  m.n_max = integer(required(j, "n_max", "model"), "model.n_max", 0);
  if (auto it = j.find("repulsive"); it != j.end()) {
    if (!it->is_boolean()) throw ConfigError("model.repulsive", "expected a boolean");
    m.repulsive = it->get<bool>();
  }
  return m;
}

RunSection parse_run(const json& j, const ModelConfig& model) {
  reject_unknown(j, "run", {"P", "lambdas", "t_list", "mu_policy", "tolerances", "P_list"});
  RunSection r;
  if (auto it = j.find("P"); it != j.end()) r.P = vec3(*it, "run.P");
  if (auto it = j.find("lambdas"); it != j.end()) {
    r.lambdas = number_list(*it, "run.lambdas");
    for (std::size_t i = 0; i < r.lambdas->size(); ++i) {
      const std::string path = "run.lambdas[" + std::to_string(i) + "]";
      const double l = (*r.lambdas)[i];
      if (!(l > 0.0)) throw ConfigError(path, "must be positive");
      if (l > model.lambda_max * (1.0 + 1e-12)) throw ConfigError(path, "exceeds model.lambda_max");
      if (i > 0 && l < (*r.lambdas)[i - 1]) throw ConfigError(path, "cutoffs must be ascending");
    }
  }
  if (auto it = j.find("t_list"); it != j.end()) {
    r.t_list = number_list(*it, "run.t_list");
    for (std::size_t i = 0; i < r.t_list.size(); ++i) {
      if (!(r.t_list[i] > 0.0)) throw ConfigError("run.t_list[" + std::to_string(i) + "]", "must be positive");
    }
  }
  if (auto it = j.find("mu_policy"); it != j.end()) {
    if (it->is_string()) {
      if (*it != "auto") throw ConfigError("run.mu_policy", "expected \"auto\" or a number");
    } else {
      r.mu = number(*it, "run.mu_policy");
    }
  }
  if (auto it = j.find("tolerances"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("run.tolerances", "expected an object");
    for (const auto& [key, value] : it->items()) {
      const std::string path = "run.tolerances." + key;
      const double x = number(value, path);
      if (x < 0.0) throw ConfigError(path, "must be nonnegative");
      try {
        r.tolerances.at(key) = x;
      } catch (const std::invalid_argument&) {
        throw ConfigError(path, "unknown key \"" + key + "\"");
      }
    }
  }
  if (auto it = j.find("P_list"); it != j.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("run.P_list", "expected a nonempty list of 3-vectors");
    for (std::size_t i = 0; i < it->size(); ++i) r.P_list.push_back(vec3((*it)[i], "run.P_list[" + std::to_string(i) + "]"));
  }
  return r;
}

OutputSection parse_outputs(const json& j) {
  reject_unknown(j, "outputs", {"report_path", "table_path", "format"});
  OutputSection o;
  if (auto it = j.find("report_path"); it != j.end()) o.report_path = string_value(*it, "outputs.report_path");
  if (auto it = j.find("table_path"); it != j.end()) o.table_path = string_value(*it, "outputs.table_path");
  if (auto it = j.find("format"); it != j.end()) o.format = parse_format(*it, "outputs.format");
  return o;
}

}  // namespace

RunConfig parse_config(const json& j) {
  reject_unknown(j, "", {"model", "run", "outputs"});
  RunConfig c;
  auto model = j.find("model");
  if (model == j.end()) throw ConfigError("model", "missing required key");
  c.model = parse_model(*model);
  if (auto it = j.find("run"); it != j.end()) c.run = parse_run(*it, c.model);
  if (auto it = j.find("outputs"); it != j.end()) c.outputs = parse_outputs(*it);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

void apply_tolerance_override(Tolerances& tol, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--tol", "expected KEY=VALUE, got \"" + assignment + "\"");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double value = 0.0;
  if (!(in >> value) || !in.eof() || !std::isfinite(value) || value < 0.0) {
    throw ConfigError("--tol " + key, "expected a finite nonnegative number, got \"" + text + "\"");
  }
  try {
    tol.at(key) = value;
  } catch (const std::invalid_argument&) {
    throw ConfigError("--tol " + key, "unknown key \"" + key + "\"");
  }
}

}  // namespace frohlich::app
