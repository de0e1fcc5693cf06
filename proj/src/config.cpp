#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dirac_loc/cli.hpp"
#include "dirac_loc/config_detail.hpp"

namespace dirac_loc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string json_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_number(v.get<double>());
  throw ConfigError("config key '" + key + "': unsupported JSON value");
}

std::string json_list(const nlohmann::json& v, const std::string& key) {
  std::string out;
  for (const auto& e : v) {
    if (!out.empty()) out += ',';
    out += json_scalar(e, key);
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  auto add = [&](std::string k, std::string v) {
    if (k.empty()) throw ConfigError("config: empty key");
    if (!seen.insert(k).second) throw ConfigError("config: duplicate key '" + k + "'");
    out.emplace_back(std::move(k), std::move(v));
  };
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    for (const auto& [k, v] : j.items()) {
      if (v.is_array()) {
        add(k, json_list(v, k));
      } else if (v.is_object()) {
        if (k != "disorder" || !v.contains("support") || !v.contains("probs") || v.size() != 2)
          throw ConfigError("config key '" + k + "': nested objects are only allowed for disorder");
        add(k, json_list(v["support"], k) + ";" + json_list(v["probs"], k));
      } else {
        add(k, json_scalar(v, k));
      }
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    add(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

namespace detail {

double parse_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const std::string t = trim(s);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': expected a finite number, got '" + s + "'");
  return v;
}

long parse_int(const std::string& key, const std::string& s) {
  long v = 0;
  const std::string t = trim(s);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size())
    throw ConfigError("config key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  std::vector<double> out;
  for (const auto& item : split(t, ',')) out.push_back(parse_real(key, item));
  return out;
}

std::vector<double> parse_grid(const std::string& key, const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ConfigError("config key '" + key + "': expected lo:hi:count");
    const double lo = parse_real(key, parts[0]), hi = parse_real(key, parts[1]);
    const long count = parse_int(key, parts[2]);
    if (count < 1 || (count == 1 && lo != hi) || hi < lo)
      throw ConfigError("config key '" + key + "': invalid grid '" + s + "'");
    for (long k = 0; k < count; ++k)
      out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1));
  } else {
    out = parse_list(key, s);
  }
  if (!std::is_sorted(out.begin(), out.end())) throw ConfigError("config key '" + key + "': grid must be sorted");
  return out;
}

std::vector<long> parse_int_list(const std::string& key, const std::string& s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  std::vector<long> out;
  for (const auto& item : split(t, ',')) {
    const long v = parse_int(key, item);
    if (v < 1) throw ConfigError("config key '" + key + "': entries must be positive");
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

namespace {

using namespace detail;

enum class Type { Real, Positive, NonNegative, Count, Grid, CountList, OptionalReal, FlavorName, Beta };

struct Param {
  const char* key;
  const char* fallback;
  Type type;
};

const std::map<std::string, std::vector<Param>>& command_params() {
  static const std::map<std::string, std::vector<Param>> table = {
      {"lyapunov",
       {{"energy", "1", Type::Real},
        {"steps", "100000", Type::Count},
        {"batches", "50", Type::Count},
        {"reorth", "1", Type::Count}}},
      {"scan", {{"grid", "0.5:1.5:11", Type::Grid}, {"steps", "20000", Type::Count}}},
      {"lie", {{"energy", "1", Type::Real}, {"tol", "1e-9", Type::Positive}}},
      {"threshold", {{"d_log_O", "0.5", Type::Positive}}},
      {"critical", {{"grid", "-2:2:41", Type::Grid}, {"tol", "1e-9", Type::Positive}}},
      {"ids", {{"grid", "-2:2:41", Type::Grid}, {"L", "200", Type::Count}, {"samples", "10", Type::Count}}},
      {"thouless",
       {{"grid", "0.4:1.6:7", Type::Grid},
        {"ids_grid", "-2.6:4.6:145", Type::Grid},
        {"L", "250", Type::Count},
        {"samples", "50", Type::Count},
        {"steps", "100000", Type::Count},
        {"margin", "3", Type::Positive}}},
      {"green", {{"energy", "1", Type::Real}, {"L_list", "40,80,120", Type::CountList}, {"samples", "200", Type::Count}}},
      {"ildse",
       {{"energy", "1", Type::Real},
        {"m", "0", Type::NonNegative},
        {"L_list", "40,120", Type::CountList},
        {"samples", "200", Type::Count},
        {"collar_outer", "3", Type::Positive},
        {"collar_inner", "1", Type::Positive}}},
      {"ldp",
       {{"energy", "1", Type::Real},
        {"p", "1", Type::Count},
        {"eps", "", Type::OptionalReal},
        {"gamma_ref", "", Type::OptionalReal},
        {"n_list", "50,200", Type::CountList},
        {"samples", "2000", Type::Count},
        {"steps", "100000", Type::Count},
        {"flavor", "none", Type::FlavorName}}},
      {"wegner",
       {{"energy", "1", Type::Real},
        {"L", "100", Type::Count},
        {"sigma", "1", Type::NonNegative},
        {"beta", "0.5", Type::Beta},
        {"samples", "100", Type::Count}}},
      {"group-check", {{"energy", "1", Type::Real}, {"samples", "1000", Type::Count}}},
  };
  return table;
}

void check_param(const Param& p, const std::string& v) {
  switch (p.type) {
    case Type::Real:
      parse_real(p.key, v);
      break;
    case Type::Positive:
      if (!(parse_real(p.key, v) > 0.0)) throw ConfigError(std::string("config key '") + p.key + "' must be positive");
      break;
    case Type::NonNegative:
      if (!(parse_real(p.key, v) >= 0.0))
        throw ConfigError(std::string("config key '") + p.key + "' must be nonnegative");
      break;
    case Type::Count:
      if (parse_int(p.key, v) < 1) throw ConfigError(std::string("config key '") + p.key + "' must be positive");
      break;
    case Type::Grid:
      parse_grid(p.key, v);
      break;
    case Type::CountList:
      parse_int_list(p.key, v);
      break;
    case Type::OptionalReal:
      if (!v.empty()) parse_real(p.key, v);
      break;
    case Type::FlavorName: {
      static const std::set<std::string> names = {"none", "F+", "F-", "F++", "F+-", "F-+", "F--"};
      if (!names.count(v)) throw ConfigError("config key 'flavor': unknown flavor '" + v + "'");
      break;
    }
    case Type::Beta: {
      const double b = parse_real(p.key, v);
      if (!(b > 0.0 && b < 1.0)) throw ConfigError("config key 'beta' must lie in (0, 1)");
      break;
    }
  }
}

Law parse_law(const std::string& s) {
  const std::string t = trim(s);
  if (t.rfind("bernoulli:", 0) == 0) {
    const double p = parse_real("disorder", t.substr(10));
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("config key 'disorder': Bernoulli parameter must lie in [0, 1]");
    return bernoulli(p);
  }
  const auto parts = split(t, ';');
  if (parts.size() != 2) throw ConfigError("config key 'disorder': expected bernoulli:p or support;probs");
  Law law{parse_list("disorder", parts[0]), parse_list("disorder", parts[1])};
  if (law.values.size() != law.probs.size())
    throw ConfigError("config key 'disorder': support and probability lists differ in length");
  return law;
}

ModelSpec build_model(const std::map<std::string, std::string>& kv) {
  auto get = [&](const std::string& k, const std::string& fallback) {
    const auto it = kv.find(k);
    return it == kv.end() ? fallback : it->second;
  };
  ModelSpec spec;
  const long N = parse_int("n", get("n", "1"));
  if (N < 1 || N > 64) throw ConfigError("config key 'n' must lie in [1, 64]");
  spec.N = static_cast<int>(N);
  spec.ell = parse_real("ell", get("ell", "0.1"));
  if (!(spec.ell > 0.0)) throw ConfigError("config key 'ell' must be positive");
  if (kv.count("case")) {
    const long c = parse_int("case", kv.at("case"));
    if (c < 1 || c > 5) throw ConfigError("config key 'case' must lie in 1..5");
    std::tie(spec.alpha, spec.beta) = case_coefficients(static_cast<int>(c));
  }
  for (int i = 0; i < 4; ++i) {
    const std::string a = "alpha" + std::to_string(i), b = "beta" + std::to_string(i);
    if (kv.count(a)) spec.alpha[static_cast<std::size_t>(i)] = parse_real(a, kv.at(a));
    if (kv.count(b)) spec.beta[static_cast<std::size_t>(i)] = parse_real(b, kv.at(b));
  }
  const std::string vper = get("vper", "delta");
  if (vper == "delta") {
    spec.v_per = delta_matrix(spec.N);
  } else {
    const auto v = parse_list("vper", vper);
    if (v.size() != static_cast<std::size_t>(N * N)) throw ConfigError("config key 'vper': expected n*n entries");
    spec.v_per = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), spec.N, spec.N);
  }
  spec.disorder.assign(static_cast<std::size_t>(spec.N), parse_law(get("disorder", "bernoulli:0.5")));
  const std::string kind = get("kind", "dirac");
  if (kind == "dirac") spec.kind = Kind::Dirac;
  else if (kind == "schrodinger") spec.kind = Kind::Schrodinger;
  else throw ConfigError("config key 'kind' must be dirac or schrodinger");
  try {
    validate(spec);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  return spec;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : command_params()) n.push_back(k);
    return n;
  }();
  return names;
}

ExperimentConfig make_config(const std::string& command,
                             const std::vector<std::pair<std::string, std::string>>& kv) {
  const auto& table = command_params();
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
  static const std::set<std::string> model_keys = {"n",      "ell",    "case",   "alpha0", "alpha1", "alpha2",
                                                   "alpha3", "beta0",  "beta1",  "beta2",  "beta3",  "vper",
                                                   "disorder", "kind"};
  static const std::set<std::string> common_keys = {"seed", "workers", "output", "command"};
  std::map<std::string, std::string> model, all;
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.echo = kv;
  for (const auto& [k, v] : kv) {
    all[k] = v;
    if (model_keys.count(k)) {
      model[k] = v;
      continue;
    }
    if (common_keys.count(k)) continue;
    const bool known = std::any_of(it->second.begin(), it->second.end(), [&](const Param& p) { return k == p.key; });
    if (!known) throw ConfigError("unknown config key '" + k + "' for command '" + command + "'");
  }
  if (all.count("command") && all["command"] != command)
    throw ConfigError("config names command '" + all["command"] + "' but '" + command + "' was requested");
  cfg.model = build_model(model);
  if (all.count("seed")) {
    const std::string s = trim(all["seed"]);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("config key 'seed': expected an unsigned 64-bit integer");
    cfg.seed = v;
  }
  if (all.count("workers")) {
    const long w = parse_int("workers", all["workers"]);
    if (w < 1) throw ConfigError("config key 'workers' must be positive");
    cfg.workers = static_cast<int>(w);
  }
  if (const char* env = std::getenv("DIRACLOC_WORKERS"); env && *env) {
    const long w = parse_int("DIRACLOC_WORKERS", env);
    if (w < 1) throw ConfigError("DIRACLOC_WORKERS must be positive");
    cfg.workers = static_cast<int>(w);
  }
  if (all.count("output")) cfg.output_path = all["output"];
  for (const Param& p : it->second) {
    const std::string v = all.count(p.key) ? all[p.key] : p.fallback;
    check_param(p, v);
    cfg.params[p.key] = v;
  }
  if (command == "ildse" && !(parse_real("collar_outer", cfg.params["collar_outer"]) >
                              parse_real("collar_inner", cfg.params["collar_inner"])))
    throw ConfigError("collar_outer must exceed collar_inner");
  return cfg;
}

}  // namespace dirac_loc
