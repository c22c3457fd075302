#include "tdvarma/config.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

namespace tdvarma {

namespace {

using Json = nlohmann::ordered_json;

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& key, const std::string& msg) const {
    std::string where = "'" + path + "'";
    if (const int line = line_of(key); line > 0) where += " (line " + std::to_string(line) + ")";
    throw ConfigError("config key " + where + ": " + msg);
  }

  void allow(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(path, last(path), "expected an object");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
      if (!ok.count(k)) fail(join(path, k), k, "unknown key");
  }

  const Json& need(const Json& obj, const std::string& path, const std::string& key) const {
    if (!obj.contains(key)) fail(join(path, key), last(path), "missing required key");
    return obj.at(key);
  }

  double number(const Json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, last(path), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, last(path), "expected a finite number");
    return x;
  }

  long long integer(const Json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, last(path), "expected an integer");
    return v.get<long long>();
  }

  bool boolean(const Json& v, const std::string& path) const {
    if (!v.is_boolean()) fail(path, last(path), "expected true or false");
    return v.get<bool>();
  }

  const Json& array(const Json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, last(path), "expected an array");
    return v;
  }

  Eigen::VectorXd vector(const Json& v, const std::string& path) const {
    array(v, path);
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
  }

  std::vector<int> int_list(const Json& v, const std::string& path) const {
    array(v, path);
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(integer(v[i], path + "[" + std::to_string(i) + "]")));
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

 private:
  static std::string last(const std::string& path) {
    std::string key = path.substr(path.rfind('.') == std::string::npos ? 0 : path.rfind('.') + 1);
    return key.substr(0, key.find('['));
  }

  int line_of(const std::string& key) const {
    if (key.empty()) return 0;
    const auto pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  const std::string& text_;
};

struct ModelParser {
  const Reader& rd;
  const std::vector<std::string>& names;
  int m;

  int slot(const Json& v, const std::string& path) const {
    const Json& ref = v.at("param");
    if (ref.is_string()) {
      const auto it = std::find(names.begin(), names.end(), ref.get<std::string>());
      if (it == names.end()) rd.fail(path + ".param", "param", "unknown parameter name '" + ref.get<std::string>() + "'");
      return static_cast<int>(it - names.begin());
    }
    const long long s = rd.integer(ref, path + ".param");
    if (s < 0 || s >= m) rd.fail(path + ".param", "param", "parameter index out of range");
    return static_cast<int>(s);
  }

  Coefficient<double> coefficient(const Json& v, const std::string& path) const {
    if (v.is_number()) return Coefficient<double>::fixed(rd.number(v, path));
    rd.allow(v, path, {"param"});
    return Coefficient<double>::parameter(slot(v, path));
  }

  double omega(const Json& v, const std::string& path) const {
    if (v.is_number()) return rd.number(v, path);
    rd.allow(v, path, {"two_pi_over_sqrt", "two_pi_over"});
    if (v.size() != 1) rd.fail(path, "omega", "give exactly one of two_pi_over_sqrt, two_pi_over");
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    if (v.contains("two_pi_over_sqrt")) {
      const long double d = rd.number(v.at("two_pi_over_sqrt"), path + ".two_pi_over_sqrt");
      if (!(d > 0)) rd.fail(path + ".two_pi_over_sqrt", "two_pi_over_sqrt", "must be positive");
      return static_cast<double>(two_pi / std::sqrt(d));
    }
    const long double d = rd.number(v.at("two_pi_over"), path + ".two_pi_over");
    if (d == 0) rd.fail(path + ".two_pi_over", "two_pi_over", "must be nonzero");
    return static_cast<double>(two_pi / d);
  }

  TimeFunction<double> function(const Json& v, const std::string& path) const {
    if (v.is_number()) return TimeFunction<double>::constant(rd.number(v, path));
    if (!v.is_object()) rd.fail(path, "", "expected a number or a function object");
    if (v.contains("param") && !v.contains("kind")) {
      rd.allow(v, path, {"param"});
      return TimeFunction<double>::parameter(slot(v, path));
    }
    const Json& kind = rd.need(v, path, "kind");
    if (!kind.is_string()) rd.fail(path + ".kind", "kind", "expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "constant") {
      rd.allow(v, path, {"kind", "value"});
      return TimeFunction<double>::constant(rd.number(rd.need(v, path, "value"), path + ".value"));
    }
    if (k == "linear") {
      rd.allow(v, path, {"kind", "intercept", "slope"});
      return TimeFunction<double>::linear(coefficient(rd.need(v, path, "intercept"), path + ".intercept"),
                                          v.contains("slope") ? coefficient(v.at("slope"), path + ".slope")
                                                              : Coefficient<double>::fixed(0.0));
    }
    if (k == "sine") {
      rd.allow(v, path, {"kind", "amplitude", "omega", "phase"});
      return TimeFunction<double>::sine(coefficient(rd.need(v, path, "amplitude"), path + ".amplitude"),
                                        omega(rd.need(v, path, "omega"), path + ".omega"),
                                        v.contains("phase") ? coefficient(v.at("phase"), path + ".phase")
                                                            : Coefficient<double>::fixed(0.0));
    }
    if (k == "exp_sine") {
      rd.allow(v, path, {"kind", "rate", "omega", "phase"});
      return TimeFunction<double>::exp_sine(coefficient(rd.need(v, path, "rate"), path + ".rate"),
                                            omega(rd.need(v, path, "omega"), path + ".omega"),
                                            v.contains("phase") ? rd.number(v.at("phase"), path + ".phase") : 0.0);
    }
    if (k == "sum" || k == "product") {
      rd.allow(v, path, {"kind", "terms"});
      const Json& terms = rd.array(rd.need(v, path, "terms"), path + ".terms");
      if (terms.size() != 2) rd.fail(path + ".terms", "terms", "expected exactly two terms");
      auto a = function(terms[0], path + ".terms[0]");
      auto b = function(terms[1], path + ".terms[1]");
      return k == "sum" ? TimeFunction<double>::sum(std::move(a), std::move(b))
                        : TimeFunction<double>::product(std::move(a), std::move(b));
    }
    rd.fail(path + ".kind", "kind", "unknown function kind '" + k + "'");
  }

  MatrixTimeFunction<double> matrix(const Json& v, const std::string& path, int r) const {
    rd.array(v, path);
    if (static_cast<int>(v.size()) != r) rd.fail(path, "", "expected " + std::to_string(r) + " rows");
    MatrixTimeFunction<double> out(r, r);
    for (int i = 0; i < r; ++i) {
      const std::string rp = path + "[" + std::to_string(i) + "]";
      const Json& row = rd.array(v[static_cast<std::size_t>(i)], rp);
      if (static_cast<int>(row.size()) != r) rd.fail(rp, "", "expected " + std::to_string(r) + " columns");
      for (int j = 0; j < r; ++j) out.set(i, j, function(row[static_cast<std::size_t>(j)], rp + "[" + std::to_string(j) + "]"));
    }
    return out;
  }
};

ParamLayoutd parse_layout(const Reader& rd, const Json& v) {
  const std::string path = "model.layout";
  rd.allow(v, path, {"names", "blocks", "true_value", "bounds"});
  ParamLayoutd lay;
  const Json& names = rd.array(rd.need(v, path, "names"), path + ".names");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!names[i].is_string()) rd.fail(path + ".names", "names", "expected strings");
    lay.names.push_back(names[i].get<std::string>());
  }
  const auto blocks = rd.int_list(rd.need(v, path, "blocks"), path + ".blocks");
  if (blocks.size() != 3) rd.fail(path + ".blocks", "blocks", "expected [A-block, B-block, g-block] sizes");
  lay.a_block = blocks[0];
  lay.b_block = blocks[1];
  lay.g_block = blocks[2];
  if (v.contains("true_value")) lay.true_value = rd.vector(v.at("true_value"), path + ".true_value");
  if (v.contains("bounds")) {
    const Json& b = rd.array(v.at("bounds"), path + ".bounds");
    lay.set_unbounded();
    if (static_cast<int>(b.size()) != lay.size()) rd.fail(path + ".bounds", "bounds", "expected one entry per parameter");
    for (int i = 0; i < lay.size(); ++i) {
      const Json& e = b[static_cast<std::size_t>(i)];
      const std::string ep = path + ".bounds[" + std::to_string(i) + "]";
      if (e.is_null()) continue;
      const Eigen::VectorXd iv = rd.vector(e, ep);
      if (iv.size() != 2) rd.fail(ep, "bounds", "expected [lower, upper] or null");
      lay.lower[i] = iv[0];
      lay.upper[i] = iv[1];
    }
  }
  try {
    lay.validate();
  } catch (const ConfigError& e) {
    rd.fail(path, "layout", e.what());
  }
  return lay;
}

Modeld parse_model(const Reader& rd, const Json& v) {
  const std::string path = "model";
  rd.allow(v, path, {"r", "A", "B", "g", "sigma", "layout"});
  const long long r = rd.integer(rd.need(v, path, "r"), "model.r");
  if (r < 1 || r > kMaxDimension) rd.fail("model.r", "r", "dimension must lie in 1..8");
  const ParamLayoutd lay = parse_layout(rd, rd.need(v, path, "layout"));
  ModelParser mp{rd, lay.names, lay.size()};
  const int ri = static_cast<int>(r);
  std::vector<MatrixTimeFunction<double>> a, b;
  if (v.contains("A")) {
    const Json& list = rd.array(v.at("A"), "model.A");
    for (std::size_t i = 0; i < list.size(); ++i) a.push_back(mp.matrix(list[i], "model.A[" + std::to_string(i) + "]", ri));
  }
  if (v.contains("B")) {
    const Json& list = rd.array(v.at("B"), "model.B");
    for (std::size_t j = 0; j < list.size(); ++j) b.push_back(mp.matrix(list[j], "model.B[" + std::to_string(j) + "]", ri));
  }
  MatrixTimeFunction<double> g = v.contains("g") ? mp.matrix(v.at("g"), "model.g", ri) : MatrixTimeFunction<double>::identity(ri);
  const Json& sj = rd.array(rd.need(v, path, "sigma"), "model.sigma");
  if (static_cast<int>(sj.size()) != ri) rd.fail("model.sigma", "sigma", "expected an r x r matrix");
  Eigen::MatrixXd sigma(ri, ri);
  for (int i = 0; i < ri; ++i) {
    const Eigen::VectorXd row = rd.vector(sj[static_cast<std::size_t>(i)], "model.sigma[" + std::to_string(i) + "]");
    if (row.size() != ri) rd.fail("model.sigma", "sigma", "expected an r x r matrix");
    sigma.row(i) = row.transpose();
  }
  try {
    return Modeld(ri, std::move(a), std::move(b), std::move(g), std::move(sigma), lay);
  } catch (const ConfigError& e) {
    rd.fail("model", "model", e.what());
  }
}

RunConfig parse_run(const Reader& rd, const Json& v, int m) {
  const std::string path = "run";
  rd.allow(v, path,
           {"seed", "n", "n_list", "replications", "theta_init", "max_iters", "grad_tol", "step_tol", "estimate_sigma",
            "sigma_iters", "n_probe", "nu_grid", "h37_grid"});
  RunConfig run;
  const auto positive = [&](const char* key) {
    const long long x = rd.integer(v.at(key), Reader::join(path, key));
    if (x < 1) rd.fail(Reader::join(path, key), key, "must be >= 1");
    return static_cast<int>(x);
  };
  if (v.contains("seed")) {
    const Json& s = v.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) rd.fail("run.seed", "seed", "expected a non-negative integer");
    run.seed = s.get<std::uint64_t>();
  }
  if (v.contains("n")) run.n = positive("n");
  if (v.contains("n_list")) run.n_list = rd.int_list(v.at("n_list"), "run.n_list");
  if (v.contains("replications")) run.replications = positive("replications");
  if (v.contains("theta_init")) {
    run.theta_init = rd.vector(v.at("theta_init"), "run.theta_init");
    if (run.theta_init->size() != m) rd.fail("run.theta_init", "theta_init", "expected " + std::to_string(m) + " values");
  }
  if (v.contains("max_iters")) run.max_iters = positive("max_iters");
  if (v.contains("grad_tol")) run.grad_tol = rd.number(v.at("grad_tol"), "run.grad_tol");
  if (v.contains("step_tol")) run.step_tol = rd.number(v.at("step_tol"), "run.step_tol");
  if (v.contains("estimate_sigma")) run.estimate_sigma = rd.boolean(v.at("estimate_sigma"), "run.estimate_sigma");
  if (v.contains("sigma_iters")) run.sigma_iters = positive("sigma_iters");
  if (v.contains("n_probe")) run.n_probe = positive("n_probe");
  if (v.contains("nu_grid")) run.nu_grid = rd.int_list(v.at("nu_grid"), "run.nu_grid");
  if (v.contains("h37_grid")) run.h37_grid = rd.int_list(v.at("h37_grid"), "run.h37_grid");
  return run;
}

}  // namespace

FitOptions RunConfig::fit_options(const Modeld& model) const {
  FitOptions o;
  if (theta_init) o.theta_init = *theta_init;
  else if (model.layout().true_value) o.theta_init = *model.layout().true_value;
  else o.theta_init = Eigen::VectorXd::Zero(model.m());
  if (max_iters) o.max_iters = *max_iters;
  if (grad_tol) o.grad_tol = *grad_tol;
  if (step_tol) o.step_tol = *step_tol;
  if (estimate_sigma) o.estimate_sigma = *estimate_sigma;
  if (sigma_iters) o.sigma_iters = *sigma_iters;
  return o;
}

AuditOptions RunConfig::audit_options() const {
  AuditOptions o;
  if (n_probe) o.n_probe = *n_probe;
  if (!nu_grid.empty()) o.nu_grid = nu_grid;
  if (!h37_grid.empty()) o.h37_grid = h37_grid;
  return o;
}

Config parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ConfigError("config is not valid JSON (line " + std::to_string(line) + ")");
  }
  const Reader rd(text);
  rd.allow(doc, "", {"model", "run"});
  Modeld model = parse_model(rd, rd.need(doc, "", "model"));
  RunConfig run = doc.contains("run") ? parse_run(rd, doc.at("run"), model.m()) : RunConfig{};
  return Config{std::move(model), std::move(run)};
}

}  // namespace tdvarma
