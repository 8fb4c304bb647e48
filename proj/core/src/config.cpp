#include "samp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "samp/error.hpp"

namespace samp {
namespace {

using nlohmann::json;

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string join(const std::vector<std::string_view>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : ", ") + std::string(x);
  return s;
}

// A JSON object being read at a dotted path; tracks which keys were consumed.
class Node {
 public:
  Node(const json& j, std::string path, std::vector<std::string_view> allowed)
      : j_(j), path_(std::move(path)), allowed_(std::move(allowed)) {
    if (!j_.is_object()) fail(path_.empty() ? "top level must be an object" : "must be an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(allowed_.begin(), allowed_.end(), it.key()) != allowed_.end()) continue;
      std::string msg = "unknown key '" + key_path(it.key()) + "'";
      const std::string hint = suggest_key(it.key(), allowed_);
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      else msg += " (allowed: " + join(allowed_) + ")";
      throw ConfigError(msg);
    }
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  const json& at(std::string_view key) const { return j_.at(std::string(key)); }

  std::string key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + msg);
  }
  [[noreturn]] void fail_key(std::string_view key, const std::string& msg) const {
    throw ConfigError(key_path(key) + ": " + msg);
  }

  const json& required(std::string_view key) const {
    if (!has(key)) fail("missing required key '" + std::string(key) + "'");
    return at(key);
  }

  double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number()) fail_key(key, "expected a number, got " + std::string(v.type_name()));
    return v.get<double>();
  }

  double required_number(std::string_view key) const {
    required(key);
    return number(key, 0.0);
  }

  std::int64_t integer(std::string_view key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer())
      fail_key(key, "expected an integer, got " + std::string(v.type_name()));
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      fail_key(key, "integer out of range");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) fail_key(key, "must be >= 0");
    fail_key(key, "expected an unsigned integer, got " + std::string(v.type_name()));
  }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail_key(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(std::string_view key, std::string fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail_key(key, "expected a string, got " + std::string(v.type_name()));
    return v.get<std::string>();
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string_view> allowed_;
};

void rethrow_as_config(const std::string& path, const std::exception& e) {
  throw ConfigError(path + ": " + e.what());
}

ChannelModel parse_channel(const json& j, const std::string& path, bool want_prior) {
  if (!j.is_object()) throw ConfigError(path + ": must be an object with a 'name'");
  if (!j.contains("name") || !j.at("name").is_string())
    throw ConfigError(path + ": missing required string key 'name'");
  const std::string name = j.at("name").get<std::string>();
  ChannelModel model;
  if (name == "gaussian") {
    Node n(j, path, {"name", "mean", "variance"});
    model = GaussianPrior{n.number("mean", 0.0), n.number("variance", 1.0)};
  } else if (name == "bernoulli-gaussian") {
    Node n(j, path, {"name", "sparsity", "mean", "variance"});
    model = BernoulliGaussianPrior{n.number("sparsity", 0.1), n.number("mean", 0.0),
                                   n.number("variance", 1.0)};
  } else if (name == "laplace") {
    Node n(j, path, {"name", "rate"});
    model = LaplacePrior{n.number("rate", 1.0)};
  } else if (name == "awgn") {
    Node n(j, path, {"name", "noise_variance"});
    model = AwgnLikelihood{n.required_number("noise_variance")};
  } else if (name == "probit") {
    Node n(j, path, {"name", "scale"});
    model = ProbitLikelihood{n.number("scale", 1.0)};
  } else {
    std::string msg = path + ".name: unknown channel '" + name + "'";
    const std::vector<std::string_view> names = {"gaussian", "bernoulli-gaussian", "laplace",
                                                 "awgn", "probit"};
    const std::string hint = suggest_key(name, names);
    msg += hint.empty() ? " (known: " + join(names) + ")" : "; did you mean '" + hint + "'?";
    throw ConfigError(msg);
  }
  if (is_prior(model) != want_prior)
    throw ConfigError(path + ".name: '" + name + "' is a " +
                      (want_prior ? "likelihood" : "prior") + ", expected a " +
                      (want_prior ? "prior" : "likelihood"));
  try {
    validate(model);
  } catch (const std::exception& e) {
    rethrow_as_config(path, e);
  }
  return model;
}

EnsembleSpec parse_ensemble(const json& j) {
  Node n(j, "ensemble", {"kind", "N", "K", "singular_values"});
  EnsembleSpec spec;
  const std::string kind = n.string("kind", "iid-gaussian");
  const auto parsed = parse_ensemble_kind(kind);
  if (!parsed) {
    const std::vector<std::string_view> kinds = {"iid-gaussian", "right-invariant",
                                                 "left-invariant", "bi-invariant",
                                                 "row-orthogonal"};
    const std::string hint = suggest_key(kind, kinds);
    n.fail_key("kind", "unknown ensemble '" + kind + "'" +
                           (hint.empty() ? " (known: " + join(kinds) + ")"
                                         : "; did you mean '" + hint + "'?"));
  }
  spec.kind = *parsed;
  n.required("N");
  n.required("K");
  const auto rows = n.integer("N", 0), cols = n.integer("K", 0);
  if (rows < 1) n.fail_key("N", "must be >= 1");
  if (cols < 1) n.fail_key("K", "must be >= 1");
  spec.rows = rows;
  spec.cols = cols;
  if (n.has("singular_values")) {
    const json& sv = n.at("singular_values");
    if (sv.is_string()) {
      if (sv.get<std::string>() != "marchenko-pastur")
        n.fail_key("singular_values", "expected \"marchenko-pastur\", {\"constant\": c} or a list");
      spec.profile = MarchenkoPasturProfile{};
    } else if (sv.is_object()) {
      Node c(sv, n.key_path("singular_values"), {"constant"});
      spec.profile = ConstantProfile{c.required_number("constant")};
    } else if (sv.is_array()) {
      ListProfile list;
      for (const json& v : sv) {
        if (!v.is_number()) n.fail_key("singular_values", "list entries must be numbers");
        list.values.push_back(v.get<double>());
      }
      spec.profile = std::move(list);
    } else {
      n.fail_key("singular_values", "expected \"marchenko-pastur\", {\"constant\": c} or a list");
    }
  }
  try {
    validate(spec);
  } catch (const std::exception& e) {
    rethrow_as_config("ensemble", e);
  }
  return spec;
}

RSource parse_r_source(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto kind = parse_r_source_kind(j.get<std::string>());
    if (!kind || *kind == RSourceKind::Constant)
      throw ConfigError(path + ": unknown R source '" + j.get<std::string>() +
                        "' (known: closed-form-mp, scaled-spectrum, free-compression, "
                        "respectralize, {\"constant\": value})");
    return {*kind, 0.0};
  }
  if (j.is_object()) {
    Node c(j, path, {"constant"});
    return {RSourceKind::Constant, c.required_number("constant")};
  }
  throw ConfigError(path + ": expected a string or {\"constant\": value}");
}

void parse_solver(const json& j, ExperimentConfig& cfg) {
  Node n(j, "solver",
         {"strategies", "max_iterations", "tolerance", "damping", "precision_floor",
          "covariance_sign", "inner_tolerance", "inner_max_iterations", "samp"});
  SolverConfig& s = cfg.solver;
  const auto max_it = n.integer("max_iterations", static_cast<std::int64_t>(s.max_iterations));
  if (max_it < 0) n.fail_key("max_iterations", "must be >= 0");
  s.max_iterations = static_cast<std::size_t>(max_it);
  s.tolerance = n.number("tolerance", s.tolerance);
  s.damping = n.number("damping", s.damping);
  s.strategy.precision_floor = n.number("precision_floor", s.strategy.precision_floor);
  s.strategy.inner_tolerance = n.number("inner_tolerance", s.strategy.inner_tolerance);
  const auto inner = n.integer("inner_max_iterations", s.strategy.inner_max_iterations);
  if (inner < 1 || inner > 1000000) n.fail_key("inner_max_iterations", "must be in [1, 1e6]");
  s.strategy.inner_max_iterations = static_cast<int>(inner);

  const std::string sign = n.string("covariance_sign", "plus");
  if (sign == "plus") s.strategy.covariance_sign = CovarianceSign::Plus;
  else if (sign == "minus") s.strategy.covariance_sign = CovarianceSign::Minus;
  else n.fail_key("covariance_sign", "expected \"plus\" or \"minus\", got '" + sign + "'");

  if (n.has("strategies")) {
    const json& list = n.at("strategies");
    if (!list.is_array() || list.empty())
      n.fail_key("strategies", "expected a non-empty list of strategy names");
    cfg.strategies.clear();
    for (const json& v : list) {
      if (!v.is_string()) n.fail_key("strategies", "entries must be strings");
      const auto kind = parse_strategy_kind(v.get<std::string>());
      if (!kind) {
        const std::vector<std::string_view> names = {"gamp-full", "gamp-iid", "exact-ep",
                                                     "samp-rtransform"};
        const std::string hint = suggest_key(v.get<std::string>(), names);
        n.fail_key("strategies", "unknown strategy '" + v.get<std::string>() + "'" +
                                     (hint.empty() ? " (known: " + join(names) + ")"
                                                   : "; did you mean '" + hint + "'?"));
      }
      cfg.strategies.push_back(*kind);
    }
  }
  if (n.has("samp")) {
    Node sn(n.at("samp"), "solver.samp", {"r_jz", "r_jx"});
    if (sn.has("r_jz")) s.strategy.r_jz = parse_r_source(sn.at("r_jz"), "solver.samp.r_jz");
    if (sn.has("r_jx")) s.strategy.r_jx = parse_r_source(sn.at("r_jx"), "solver.samp.r_jx");
  }
  try {
    validate(s);
  } catch (const std::exception& e) {
    rethrow_as_config("solver", e);
  }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::string suggest_key(std::string_view key, const std::vector<std::string_view>& candidates) {
  std::string_view best;
  std::size_t best_d = std::string_view::npos;
  for (auto c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  const std::size_t limit = std::max<std::size_t>(2, key.size() / 3);
  if (best.empty() || best_d > limit) return {};
  return std::string(best);
}

SolverConfig ExperimentConfig::solver_for(StrategyKind kind) const {
  SolverConfig c = solver;
  c.strategy.kind = kind;
  return c;
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, false);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    // Drop the library's "[json.exception.parse_error.101] parse error at ..." preamble.
    const auto pos = what.find(": ", what.find("parse error"));
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": syntax error" +
                      (pos == std::string::npos ? "" : what.substr(pos)));
  }

  Node root(j, "",
            {"schema_version", "ensemble", "prior", "likelihood", "solver", "trials", "seed",
             "jobs", "output"});
  ExperimentConfig cfg;
  const auto version = root.integer("schema_version", kSchemaVersion);
  if (version != kSchemaVersion)
    root.fail_key("schema_version", "unsupported version " + std::to_string(version) +
                                        " (this build reads " + std::to_string(kSchemaVersion) +
                                        ")");
  cfg.schema_version = static_cast<int>(version);
  cfg.ensemble = parse_ensemble(root.required("ensemble"));
  cfg.prior = parse_channel(root.required("prior"), "prior", true);
  cfg.likelihood = parse_channel(root.required("likelihood"), "likelihood", false);
  if (root.has("solver")) parse_solver(root.at("solver"), cfg);

  const auto trials = root.integer("trials", 1);
  if (trials < 1) root.fail_key("trials", "must be >= 1, got " + std::to_string(trials));
  cfg.trials = static_cast<std::size_t>(trials);
  cfg.seed = root.unsigned_integer("seed", 0);
  cfg.ensemble.seed = cfg.seed;
  const auto jobs = root.integer("jobs", 1);
  if (jobs < 1 || jobs > 1024) root.fail_key("jobs", "must be in [1, 1024]");
  cfg.jobs = static_cast<unsigned>(jobs);

  if (root.has("output")) {
    Node o(root.at("output"), "output", {"directory", "trajectories", "state_dumps", "matrix_dumps"});
    cfg.output.directory = o.string("directory", cfg.output.directory.string());
    cfg.output.trajectories = o.boolean("trajectories", cfg.output.trajectories);
    cfg.output.state_dumps = o.boolean("state_dumps", cfg.output.state_dumps);
    cfg.output.matrix_dumps = o.boolean("matrix_dumps", cfg.output.matrix_dumps);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace samp
