#include "streamflow/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : s_(text) {}

  Json document() {
    Json root = Json::object();
    std::vector<std::string> table;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_ws();
        table = parse_dotted_key();
        skip_ws();
        expect(']');
        Json* node = &root;
        for (const auto& k : table) {
          if (!node->contains(k)) (*node)[k] = Json::object();
          node = &(*node)[k];
          if (!node->is_object()) fail("'" + join(table) + "' is not a table");
        }
        if (!defined_tables_.insert(join(table)).second) fail("table [" + join(table) + "] defined twice");
      } else {
        auto key = parse_dotted_key();
        skip_ws();
        expect('=');
        skip_ws();
        Json value = parse_value();
        std::vector<std::string> full = table;
        full.insert(full.end(), key.begin(), key.end());
        insert(root, full, std::move(value));
      }
      end_of_line();
    }
    return root;
  }

  Json single_value() {
    skip_ws();
    Json v = parse_value();
    skip_ws();
    if (!eof()) fail("trailing characters after value");
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  // Whitespace, comments and newlines (inside arrays).
  void skip_all() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        if (peek() == '\n') ++line_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  void skip_blank_lines() { skip_all(); }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("expected end of line");
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ".") + p;
    return out;
  }

  std::string parse_simple_key() {
    if (peek() == '"') return parse_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
      key += s_[pos_++];
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_simple_key()};
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      skip_ws();
      parts.push_back(parse_simple_key());
      skip_ws();
    }
    return parts;
  }

  void insert(Json& root, const std::vector<std::string>& path, Json value) {
    Json* node = &root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!node->contains(path[i])) (*node)[path[i]] = Json::object();
      node = &(*node)[path[i]];
      if (!node->is_object()) fail("'" + path[i] + "' is not a table");
    }
    if (node->contains(path.back())) fail("duplicate key '" + join(path) + "'");
    (*node)[path.back()] = std::move(value);
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated string");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  // 'text' with no escapes.
  std::string parse_literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '\'') return out;
      out += c;
    }
  }

  Json parse_value() {
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  Json parse_number() {
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_'))
      if (s_[pos_++] != '_') tok += s_[pos_ - 1];
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "+inf" ||
                          tok == "-inf" || tok == "nan";
    char* end = nullptr;
    if (is_float) {
      const double v = std::strtod(tok.c_str(), &end);
      if (*end != '\0') fail("invalid number '" + tok + "'");
      return v;
    }
    errno = 0;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE) fail("invalid value '" + tok + "'");
    return static_cast<std::int64_t>(v);
  }

  Json parse_array() {
    expect('[');
    Json arr = Json::array();
    skip_all();
    if (peek() == ']') {
      ++pos_;
      return arr;
    }
    while (true) {
      skip_all();
      arr.push_back(parse_value());
      skip_all();
      if (peek() == ',') {
        ++pos_;
        skip_all();
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        continue;
      }
      expect(']');
      return arr;
    }
  }

  Json parse_inline_table() {
    expect('{');
    Json obj = Json::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return obj;
    }
    while (true) {
      skip_ws();
      auto key = parse_dotted_key();
      skip_ws();
      expect('=');
      skip_ws();
      insert(obj, key, parse_value());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return obj;
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> defined_tables_;
};

// Accessors that name the offending key on a type mismatch.
const Json& at(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("missing key '" + where + "." + key + "'");
  return j.at(key);
}

double get_double(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = at(j, key, where);
  if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  return v.get<double>();
}

std::int64_t get_int(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = at(j, key, where);
  if (!v.is_number_integer()) throw ConfigError("'" + where + "." + key + "' must be an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = at(j, key, where);
  if (!v.is_boolean()) throw ConfigError("'" + where + "." + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = at(j, key, where);
  if (!v.is_string()) throw ConfigError("'" + where + "." + key + "' must be a string");
  return v.get<std::string>();
}

Vector get_vector(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError("'" + where + "' must be an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError("'" + where + "' must be an array of numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be a table");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* allowed : keys) ok = ok || k == allowed;
    if (!ok) throw ConfigError("unknown key '" + where + "." + k + "'");
  }
}

// Tables replaced wholesale by the user (their valid keys depend on `type`).
bool tagged_path(const std::string& path) {
  return path == "data.source" || path == "data.target" || path == "train.kernel";
}

void merge_strict(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("'" + (path.empty() ? "<root>" : path) + "' must be a table");
  for (const auto& [k, v] : user.items()) {
    const std::string child = path.empty() ? k : path + "." + k;
    if (!base.contains(k)) throw ConfigError("unknown key '" + child + "'");
    Json& slot = base[k];
    if (slot.is_object() && !tagged_path(child)) {
      merge_strict(slot, v, child);
    } else if (tagged_path(child) && slot.is_object() && v.is_object() && !v.contains("type")) {
      // Partial update of the current tagged table, e.g. train.kernel.l = 0.5.
      for (const auto& [kk, vv] : v.items()) slot[kk] = vv;
    } else {
      slot = v;
    }
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Json parse_toml(const std::string& text) { return TomlParser(text).document(); }

Json parse_toml_value(const std::string& text) {
  try {
    return TomlParser(text).single_value();
  } catch (const ConfigError&) {
    return text;
  }
}

std::string to_string(Layout layout) {
  switch (layout) {
    case Layout::pair: return "pair";
    case Layout::paired_v: return "paired_v";
    case Layout::crossing: return "crossing";
  }
  return "?";
}

Layout parse_layout(const std::string& name) {
  for (auto l : {Layout::pair, Layout::paired_v, Layout::crossing})
    if (to_string(l) == name) return l;
  throw ConfigError("unknown dataset layout '" + name + "' (expected pair, paired_v or crossing)");
}

Json kernel_to_json(const KernelSpec& k) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SquaredExponential>)
          return {{"type", "se"}, {"alpha", v.alpha}, {"l", v.length}};
        else if constexpr (std::is_same_v<T, LinearKernel>)
          return {{"type", "linear"}, {"sigma_a", v.sigma_a}, {"sigma_b", v.sigma_b}};
        else if constexpr (std::is_same_v<T, DotProductIncreasing>)
          return {{"type", "dot_increasing"}, {"alpha", v.alpha}};
        else if constexpr (std::is_same_v<T, DotProductDecreasing>)
          return {{"type", "dot_decreasing"}, {"alpha", v.alpha}};
        else if constexpr (std::is_same_v<T, Nugget>)
          return {{"type", "nugget"}, {"sigma_w", v.sigma_w}};
        else {
          Json members = Json::array();
          for (const auto& m : v.members) members.push_back(kernel_to_json(m));
          return {{"type", "sum"}, {"members", members}};
        }
      },
      k.variant());
}

KernelSpec kernel_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be a table such as { type = \"se\", alpha = 1.0, l = 0.3 }");
  const std::string type = get_string(j, "type", where);
  if (type == "se") {
    only_keys(j, {"type", "alpha", "l"}, where);
    return KernelSpec::squared_exponential(get_double(j, "alpha", where), get_double(j, "l", where));
  }
  if (type == "linear") {
    only_keys(j, {"type", "sigma_a", "sigma_b"}, where);
    return KernelSpec::linear(get_double(j, "sigma_a", where), get_double(j, "sigma_b", where));
  }
  if (type == "dot_increasing") {
    only_keys(j, {"type", "alpha"}, where);
    return KernelSpec::dot_increasing(get_double(j, "alpha", where));
  }
  if (type == "dot_decreasing") {
    only_keys(j, {"type", "alpha"}, where);
    return KernelSpec::dot_decreasing(get_double(j, "alpha", where));
  }
  if (type == "nugget") {
    only_keys(j, {"type", "sigma_w"}, where);
    return KernelSpec::nugget(get_double(j, "sigma_w", where));
  }
  if (type == "sum") {
    only_keys(j, {"type", "members"}, where);
    const Json& members = at(j, "members", where);
    if (!members.is_array()) throw ConfigError("'" + where + ".members' must be an array of kernels");
    std::vector<KernelSpec> out;
    for (std::size_t i = 0; i < members.size(); ++i)
      out.push_back(kernel_from_json(members[i], where + ".members[" + std::to_string(i) + "]"));
    return KernelSpec::sum(std::move(out));
  }
  throw ConfigError("'" + where + ".type' = '" + type +
                    "' is not a kernel (expected se, linear, dot_increasing, dot_decreasing, nugget or sum)");
}

Json distribution_to_json(const Distribution& d) {
  if (d.kind == Distribution::Kind::std_gaussian) return {{"type", "std_gaussian"}, {"dim", d.dim}};
  Json means = Json::array();
  for (Eigen::Index r = 0; r < d.means.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < d.means.cols(); ++c) row.push_back(d.means(r, c));
    means.push_back(row);
  }
  return {{"type", "mixture"},
          {"means", means},
          {"sds", std::vector<double>(d.sds.data(), d.sds.data() + d.sds.size())},
          {"weights", std::vector<double>(d.weights.data(), d.weights.data() + d.weights.size())}};
}

Distribution distribution_from_json(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "two_gaussians") return two_gaussians();
    if (name == "three_gaussians") return three_gaussians();
    if (name == "std_gaussian") return Distribution::std_gaussian(2);
    throw ConfigError("'" + where + "' = '" + name +
                      "' is not a preset (expected two_gaussians, three_gaussians or std_gaussian)");
  }
  if (!j.is_object()) throw ConfigError("'" + where + "' must be a preset name or a table");
  const std::string type = get_string(j, "type", where);
  if (type == "std_gaussian") {
    only_keys(j, {"type", "dim"}, where);
    return Distribution::std_gaussian(static_cast<int>(get_int(j, "dim", where)));
  }
  if (type == "two_gaussians" || type == "three_gaussians") {
    only_keys(j, {"type"}, where);
    return type == "two_gaussians" ? two_gaussians() : three_gaussians();
  }
  if (type == "mixture") {
    only_keys(j, {"type", "means", "sds", "weights"}, where);
    const Json& means = at(j, "means", where);
    if (!means.is_array() || means.empty()) throw ConfigError("'" + where + ".means' must be a non-empty array of rows");
    Matrix m;
    for (std::size_t r = 0; r < means.size(); ++r) {
      const Vector row = get_vector(means[r], where + ".means[" + std::to_string(r) + "]");
      if (r == 0) m.resize(static_cast<Eigen::Index>(means.size()), row.size());
      if (row.size() != m.cols()) throw ConfigError("'" + where + ".means' rows differ in length");
      m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return Distribution::mixture(m, get_vector(at(j, "sds", where), where + ".sds"),
                                 get_vector(at(j, "weights", where), where + ".weights"));
  }
  throw ConfigError("'" + where + ".type' = '" + type +
                    "' is not a distribution (expected std_gaussian, mixture, two_gaussians or three_gaussians)");
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;

  const DatasetSpec& d = c.data;
  j["data"] = {{"layout", to_string(d.layout)},
               {"n_train", d.n_train},
               {"finite_source", d.finite_source},
               {"source", distribution_to_json(d.source)},
               {"target", distribution_to_json(d.target)},
               {"paired_v",
                {{"arm_x", d.paired_v.arm_x},
                 {"arm_y", d.paired_v.arm_y},
                 {"end_x", d.paired_v.end_x},
                 {"end_y", d.paired_v.end_y},
                 {"spread", d.paired_v.spread},
                 {"end_noise", d.paired_v.end_noise}}},
               {"crossing",
                {{"offset", d.crossing.offset}, {"level_sd", d.crossing.level_sd}, {"noise", d.crossing.noise}}}};

  const TrainConfig& t = c.train;
  j["train"] = {{"algorithm", to_string(t.algorithm)},
                {"kernel", kernel_to_json(t.gp_kernel)},
                {"variance", to_string(t.variance.kind)},
                {"variance_param", t.variance.param},
                {"linear_sigma_a", t.linear_sigma_a},
                {"linear_sigma_b", t.linear_sigma_b},
                {"sigma", t.sigma},
                {"covariate", to_string(t.covariate)},
                {"batch_size", t.batch_size},
                {"iterations", t.iterations},
                {"lr", t.adam.lr},
                {"beta1", t.adam.beta1},
                {"beta2", t.adam.beta2},
                {"eps", t.adam.eps},
                {"hidden", t.hidden},
                {"activation", to_string(t.activation)},
                {"t_per_batch", t.t_per_batch},
                {"loss_every", t.loss_every},
                {"linear_fast_path", t.linear_fast_path}};

  const IntegratorSpec& i = c.integrator;
  j["integrator"] = {{"method", to_string(i.method)}, {"n_steps", i.n_steps},     {"rtol", i.rtol},
                     {"atol", i.atol},                {"max_steps", i.max_steps}, {"initial_step", i.initial_step}};
  j["eval"] = {{"test_size", c.eval.test_size}, {"w2_size", c.eval.w2_size}};
  j["schemes"] = {{"constant", c.schemes.constant},
                  {"increasing", c.schemes.increasing},
                  {"decreasing", c.schemes.decreasing}};
  return j;
}

ExperimentConfig experiment_from_json(const Json& user) {
  Json j = to_json(ExperimentConfig{});
  merge_strict(j, user, "");

  ExperimentConfig c;
  const Json& seeds = j["seeds"];
  if (!seeds.is_array() || seeds.empty()) throw ConfigError("'seeds' must be a non-empty array of integers");
  c.seeds.clear();
  for (const auto& s : seeds) {
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
      throw ConfigError("'seeds' entries must be non-negative integers");
    c.seeds.push_back(s.get<std::uint64_t>());
  }
  c.output_dir = get_string(j, "output_dir", "");

  const Json& d = j["data"];
  c.data.layout = parse_layout(get_string(d, "layout", "data"));
  c.data.n_train = get_int(d, "n_train", "data");
  c.data.finite_source = get_bool(d, "finite_source", "data");
  c.data.source = distribution_from_json(d["source"], "data.source");
  c.data.target = distribution_from_json(d["target"], "data.target");
  const Json& pv = d["paired_v"];
  c.data.paired_v = {get_double(pv, "arm_x", "data.paired_v"),  get_double(pv, "arm_y", "data.paired_v"),
                     get_double(pv, "end_x", "data.paired_v"),  get_double(pv, "end_y", "data.paired_v"),
                     get_double(pv, "spread", "data.paired_v"), get_double(pv, "end_noise", "data.paired_v")};
  const Json& cr = d["crossing"];
  c.data.crossing = {get_double(cr, "offset", "data.crossing"), get_double(cr, "level_sd", "data.crossing"),
                     get_double(cr, "noise", "data.crossing")};

  const Json& t = j["train"];
  c.train.algorithm = parse_algorithm(get_string(t, "algorithm", "train"));
  c.train.gp_kernel = kernel_from_json(t["kernel"], "train.kernel");
  c.train.variance.kind = parse_variance(get_string(t, "variance", "train"));
  c.train.variance.param = get_double(t, "variance_param", "train");
  c.train.linear_sigma_a = get_double(t, "linear_sigma_a", "train");
  c.train.linear_sigma_b = get_double(t, "linear_sigma_b", "train");
  c.train.sigma = get_double(t, "sigma", "train");
  c.train.covariate = parse_covariate_mode(get_string(t, "covariate", "train"));
  c.train.batch_size = get_int(t, "batch_size", "train");
  const auto iterations = get_int(t, "iterations", "train");
  if (iterations < 0) throw ConfigError("'train.iterations' must be >= 0");
  c.train.iterations = static_cast<std::size_t>(iterations);
  c.train.adam = {get_double(t, "lr", "train"), get_double(t, "beta1", "train"), get_double(t, "beta2", "train"),
                  get_double(t, "eps", "train")};
  const Json& hidden = t["hidden"];
  if (!hidden.is_array()) throw ConfigError("'train.hidden' must be an array of layer widths");
  c.train.hidden.clear();
  for (const auto& h : hidden) {
    if (!h.is_number_integer()) throw ConfigError("'train.hidden' must be an array of layer widths");
    c.train.hidden.push_back(h.get<int>());
  }
  c.train.activation = parse_activation(get_string(t, "activation", "train"));
  c.train.t_per_batch = get_bool(t, "t_per_batch", "train");
  const auto loss_every = get_int(t, "loss_every", "train");
  if (loss_every < 1) throw ConfigError("'train.loss_every' must be >= 1");
  c.train.loss_every = static_cast<std::size_t>(loss_every);
  c.train.linear_fast_path = get_bool(t, "linear_fast_path", "train");

  const Json& i = j["integrator"];
  c.integrator.method = parse_method(get_string(i, "method", "integrator"));
  c.integrator.n_steps = static_cast<int>(get_int(i, "n_steps", "integrator"));
  c.integrator.rtol = get_double(i, "rtol", "integrator");
  c.integrator.atol = get_double(i, "atol", "integrator");
  c.integrator.max_steps = static_cast<int>(get_int(i, "max_steps", "integrator"));
  c.integrator.initial_step = get_double(i, "initial_step", "integrator");

  c.eval.test_size = get_int(j["eval"], "test_size", "eval");
  c.eval.w2_size = get_int(j["eval"], "w2_size", "eval");
  c.data.n_test = c.eval.test_size;
  c.schemes = {get_double(j["schemes"], "constant", "schemes"), get_double(j["schemes"], "increasing", "schemes"),
               get_double(j["schemes"], "decreasing", "schemes")};

  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  data.validate();
  train.validate();
  integrator.validate();
  if (eval.w2_size < 1 || eval.w2_size > eval.test_size)
    throw ConfigError("eval.w2_size must be in [1, eval.test_size]");
  if (data.n_test != eval.test_size) throw ConfigError("data.n_test must equal eval.test_size");
  if (data.layout == Layout::paired_v && data.source.dim != 2)
    throw ConfigError("paired_v noise source must be 2-dimensional");
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  std::vector<std::string> path;
  std::stringstream ks(key);
  for (std::string part; std::getline(ks, part, '.');) {
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    path.push_back(part);
  }
  Json* node = &doc;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->contains(path[i])) (*node)[path[i]] = Json::object();
    node = &(*node)[path[i]];
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-table");
  }
  (*node)[path.back()] = parse_toml_value(assignment.substr(eq + 1));
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::vector<std::string>& overrides) {
  Json doc = parse_toml(text);
  for (const auto& o : overrides) apply_override(doc, o);
  return experiment_from_json(doc);
}

ExperimentConfig load_experiment_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), overrides);
}

std::string config_hash(const ExperimentConfig& config) {
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(config).dump())));
  return out;
}

}  // namespace streamflow
