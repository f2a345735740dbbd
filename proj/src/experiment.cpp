#include "phisum/experiment.hpp"

#include "phisum/dimant_sigma.hpp"
#include "phisum/domination_space.hpp"
#include "phisum/multilinear_summing.hpp"
#include "phisum/verify_suite.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace phisum {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::pair<int, int> line_column(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Line and column of every value in a document that is already known to be
// valid JSON, keyed by JSON pointer.
class PositionIndex {
 public:
  explicit PositionIndex(const std::string& text) : text_(text) {
    std::size_t i = 0;
    value(i, "");
  }

  std::pair<int, int> locate(std::string ptr) const {
    for (;;) {
      if (auto it = at_.find(ptr); it != at_.end()) return where(it->second);
      if (ptr.empty()) return {1, 1};
      ptr.erase(ptr.rfind('/'));
    }
  }

  std::pair<int, int> where(std::size_t offset) const { return line_column(text_, offset); }

 private:
  void ws(std::size_t& i) const {
    while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
  }

  std::string string(std::size_t& i) const {
    std::string out;
    ++i;
    while (i < text_.size() && text_[i] != '"') {
      if (text_[i] == '\\' && i + 1 < text_.size()) {
        out += text_[i + 1];
        i += 2;
      } else {
        out += text_[i++];
      }
    }
    ++i;
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  void value(std::size_t& i, const std::string& ptr) {
    ws(i);
    at_[ptr] = i;
    if (i >= text_.size()) return;
    const char c = text_[i];
    if (c == '{') {
      ++i;
      for (;;) {
        ws(i);
        if (i >= text_.size() || text_[i] == '}') break;
        if (text_[i] == ',') {
          ++i;
          continue;
        }
        const std::string key = string(i);
        ws(i);
        ++i;  // ':'
        value(i, ptr + "/" + escape(key));
      }
      ++i;
    } else if (c == '[') {
      ++i;
      int n = 0;
      for (;;) {
        ws(i);
        if (i >= text_.size() || text_[i] == ']') break;
        if (text_[i] == ',') {
          ++i;
          continue;
        }
        value(i, ptr + "/" + std::to_string(n++));
      }
      ++i;
    } else if (c == '"') {
      string(i);
    } else {
      while (i < text_.size() && !std::isspace(static_cast<unsigned char>(text_[i])) && text_[i] != ',' &&
             text_[i] != ']' && text_[i] != '}')
        ++i;
    }
  }

  const std::string& text_;
  std::map<std::string, std::size_t> at_;
};

class Reader {
 public:
  Reader(const PositionIndex& idx, std::string source) : idx_(idx), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    const auto [line, col] = idx_.locate(ptr);
    throw Error(ErrorCode::parse_error,
                source_ + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }

  void object(const json& j, const std::string& ptr, std::initializer_list<const char*> keys) const {
    if (!j.is_object()) fail(ptr, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
      if (!allowed.count(k)) fail(ptr + "/" + k, "unknown key \"" + k + "\"");
  }

  double number(const json& j, const std::string& ptr) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && (j == "inf" || j == "+inf")) return kInf;
    fail(ptr, "expected a number");
  }

  int integer(const json& j, const std::string& ptr) const {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    return j.get<int>();
  }

  std::string text(const json& j, const std::string& ptr) const {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
  }

  std::vector<double> numbers(const json& j, const std::string& ptr) const {
    if (!j.is_array()) fail(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], ptr + "/" + std::to_string(k)));
    return out;
  }

 private:
  const PositionIndex& idx_;
  std::string source_;
};

const std::set<std::string> kTasks{"summing", "strongly", "multi-ideal", "dimant", "factorable", "factorize",
                                   "verify-suite"};
const std::set<std::string> kLinearPhi{"identity", "sigma_interp", "square_over_norm", "anchored"};
const std::set<std::string> kTensorPhi{"identity", "factorable"};

PhiSpec read_phi(const Reader& rd, const json& j, const std::string& ptr) {
  rd.object(j, ptr, {"kind", "sigma", "anchor"});
  PhiSpec s;
  if (j.contains("kind")) s.kind = rd.text(j["kind"], ptr + "/kind");
  if (j.contains("sigma")) s.sigma = rd.number(j["sigma"], ptr + "/sigma");
  if (j.contains("anchor")) s.anchor = rd.numbers(j["anchor"], ptr + "/anchor");
  if (!(s.sigma >= 0.0 && s.sigma < 1.0)) rd.fail(ptr + "/sigma", "sigma must lie in [0, 1)");
  return s;
}

ExperimentConfig read_config(const Reader& rd, const json& root) {
  rd.object(root, "", {"schema", "task", "spaces", "operators", "operator", "phi", "phis", "exponents", "solver",
                       "filter", "timings"});
  ExperimentConfig cfg;
  if (!root.contains("schema")) rd.fail("", "missing \"schema\"");
  cfg.schema = rd.integer(root["schema"], "/schema");
  if (cfg.schema != kConfigSchema) rd.fail("/schema", "unsupported schema " + std::to_string(cfg.schema));
  if (!root.contains("task")) rd.fail("", "missing \"task\"");
  cfg.task = rd.text(root["task"], "/task");
  if (!kTasks.count(cfg.task)) rd.fail("/task", "unknown task \"" + cfg.task + "\"");

  if (root.contains("spaces")) {
    const auto& a = root["spaces"];
    if (!a.is_array()) rd.fail("/spaces", "expected an array");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::string ptr = "/spaces/" + std::to_string(k);
      rd.object(a[k], ptr, {"name", "kind", "dim", "q", "facets"});
      SpaceSpec s;
      if (!a[k].contains("name")) rd.fail(ptr, "space needs a name");
      s.name = rd.text(a[k]["name"], ptr + "/name");
      if (a[k].contains("kind")) s.kind = rd.text(a[k]["kind"], ptr + "/kind");
      if (s.kind == "lq") {
        if (!a[k].contains("dim") || !a[k].contains("q")) rd.fail(ptr, "lq space needs dim and q");
        if (a[k].contains("facets")) rd.fail(ptr + "/facets", "facets belong to polytope spaces");
        s.dim = rd.integer(a[k]["dim"], ptr + "/dim");
        s.q = rd.number(a[k]["q"], ptr + "/q");
        if (!(s.q >= 1.0)) rd.fail(ptr + "/q", "q must be at least 1");
      } else if (s.kind == "polytope") {
        if (!a[k].contains("facets")) rd.fail(ptr, "polytope space needs facets");
        if (a[k].contains("q")) rd.fail(ptr + "/q", "q belongs to lq spaces");
        const auto& f = a[k]["facets"];
        if (!f.is_array() || f.empty()) rd.fail(ptr + "/facets", "expected a nonempty array of facet normals");
        for (std::size_t t = 0; t < f.size(); ++t) s.facets.push_back(rd.numbers(f[t], ptr + "/facets/" + std::to_string(t)));
        s.dim = static_cast<int>(s.facets.front().size());
        if (a[k].contains("dim") && rd.integer(a[k]["dim"], ptr + "/dim") != s.dim)
          rd.fail(ptr + "/dim", "dim does not match the facet normals");
        for (std::size_t t = 0; t < s.facets.size(); ++t)
          if (static_cast<int>(s.facets[t].size()) != s.dim)
            rd.fail(ptr + "/facets/" + std::to_string(t), "facet normals differ in length");
      } else {
        rd.fail(ptr + "/kind", "unknown space kind \"" + s.kind + "\"");
      }
      if (s.dim < 1) rd.fail(ptr + "/dim", "dim must be positive");
      for (const auto& o : cfg.spaces)
        if (o.name == s.name) rd.fail(ptr + "/name", "duplicate space \"" + s.name + "\"");
      cfg.spaces.push_back(std::move(s));
    }
  }
  auto space = [&](const std::string& name, const std::string& ptr) -> const SpaceSpec& {
    for (const auto& s : cfg.spaces)
      if (s.name == name) return s;
    rd.fail(ptr, "unknown space \"" + name + "\"");
  };

  if (root.contains("operators")) {
    const auto& a = root["operators"];
    if (!a.is_array()) rd.fail("/operators", "expected an array");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::string ptr = "/operators/" + std::to_string(k);
      rd.object(a[k], ptr, {"name", "domain", "domains", "codomain", "coefficients"});
      OperatorSpec o;
      if (!a[k].contains("name")) rd.fail(ptr, "operator needs a name");
      o.name = rd.text(a[k]["name"], ptr + "/name");
      if (a[k].contains("domain") == a[k].contains("domains")) rd.fail(ptr, "give exactly one of domain, domains");
      if (a[k].contains("domain")) {
        o.domains.push_back(rd.text(a[k]["domain"], ptr + "/domain"));
      } else {
        const auto& d = a[k]["domains"];
        if (!d.is_array() || d.empty()) rd.fail(ptr + "/domains", "expected a nonempty array of space names");
        for (std::size_t t = 0; t < d.size(); ++t) o.domains.push_back(rd.text(d[t], ptr + "/domains/" + std::to_string(t)));
      }
      if (!a[k].contains("codomain") || !a[k].contains("coefficients")) rd.fail(ptr, "operator needs codomain and coefficients");
      o.codomain = rd.text(a[k]["codomain"], ptr + "/codomain");
      o.coefficients = rd.numbers(a[k]["coefficients"], ptr + "/coefficients");
      std::size_t want = static_cast<std::size_t>(space(o.codomain, ptr + "/codomain").dim);
      for (std::size_t t = 0; t < o.domains.size(); ++t)
        want *= static_cast<std::size_t>(
            space(o.domains[t], ptr + (a[k].contains("domain") ? "/domain" : "/domains/" + std::to_string(t))).dim);
      if (o.coefficients.size() != want)
        rd.fail(ptr + "/coefficients", "expected " + std::to_string(want) + " coefficients, got " +
                                           std::to_string(o.coefficients.size()));
      for (const auto& p : cfg.operators)
        if (p.name == o.name) rd.fail(ptr + "/name", "duplicate operator \"" + o.name + "\"");
      cfg.operators.push_back(std::move(o));
    }
  }

  if (root.contains("operator")) cfg.target = rd.text(root["operator"], "/operator");
  if (root.contains("phi")) cfg.phi = read_phi(rd, root["phi"], "/phi");
  if (root.contains("phis")) {
    const auto& a = root["phis"];
    if (!a.is_array()) rd.fail("/phis", "expected an array");
    for (std::size_t k = 0; k < a.size(); ++k) cfg.phis.push_back(read_phi(rd, a[k], "/phis/" + std::to_string(k)));
  }
  if (root.contains("exponents")) {
    const auto& e = root["exponents"];
    rd.object(e, "/exponents", {"p", "r", "p_j", "sigma"});
    if (e.contains("p")) cfg.p = rd.number(e["p"], "/exponents/p");
    if (e.contains("r")) cfg.r = rd.number(e["r"], "/exponents/r");
    if (e.contains("p_j")) cfg.p_j = rd.numbers(e["p_j"], "/exponents/p_j");
    if (e.contains("sigma")) cfg.sigma = rd.number(e["sigma"], "/exponents/sigma");
    if (cfg.p && !(*cfg.p > 0.0 && std::isfinite(*cfg.p))) rd.fail("/exponents/p", "p must be positive and finite");
    if (cfg.r && !(*cfg.r > 0.0 && std::isfinite(*cfg.r))) rd.fail("/exponents/r", "r must be positive and finite");
    if (!(cfg.sigma >= 0.0 && cfg.sigma < 1.0)) rd.fail("/exponents/sigma", "sigma must lie in [0, 1)");
    for (std::size_t k = 0; k < cfg.p_j.size(); ++k)
      if (!(cfg.p_j[k] > 0.0)) rd.fail("/exponents/p_j/" + std::to_string(k), "exponents must be positive");
  }
  cfg.solver.threads = default_thread_count();
  if (root.contains("solver")) {
    const auto& s = root["solver"];
    rd.object(s, "/solver", {"max_iter", "tol_gap", "mesh_resolution", "seed", "restarts", "family_size", "rank_cap",
                             "samples", "threads"});
    auto positive = [&](const char* key, int& field) {
      if (!s.contains(key)) return;
      field = rd.integer(s[key], std::string("/solver/") + key);
      if (field < 1) rd.fail(std::string("/solver/") + key, std::string(key) + " must be positive");
    };
    positive("max_iter", cfg.solver.max_iter);
    positive("mesh_resolution", cfg.solver.mesh_resolution);
    positive("restarts", cfg.solver.restarts);
    positive("family_size", cfg.solver.family_size);
    positive("rank_cap", cfg.solver.rank_cap);
    positive("samples", cfg.solver.samples);
    positive("threads", cfg.solver.threads);
    if (s.contains("tol_gap")) {
      cfg.solver.tol_gap = rd.number(s["tol_gap"], "/solver/tol_gap");
      if (!(cfg.solver.tol_gap > 0.0)) rd.fail("/solver/tol_gap", "tol_gap must be positive");
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) rd.fail("/solver/seed", "seed must be a nonnegative integer");
      cfg.solver.seed = s["seed"].get<std::uint64_t>();
    }
  }
  if (root.contains("filter")) {
    const auto& f = root["filter"];
    if (!f.is_array()) rd.fail("/filter", "expected an array of criterion ids");
    const auto ids = criterion_ids();
    for (std::size_t k = 0; k < f.size(); ++k) {
      const int id = rd.integer(f[k], "/filter/" + std::to_string(k));
      if (std::find(ids.begin(), ids.end(), id) == ids.end())
        rd.fail("/filter/" + std::to_string(k), "no criterion with id " + std::to_string(id));
      cfg.filter.push_back(id);
    }
  }
  if (root.contains("timings")) {
    if (!root["timings"].is_boolean()) rd.fail("/timings", "expected true or false");
    cfg.timings = root["timings"].get<bool>();
  }

  // Task requirements.
  if (cfg.task == "verify-suite") return cfg;
  if (!cfg.filter.empty()) rd.fail("/filter", "filter applies to verify-suite only");
  if (cfg.target.empty()) rd.fail("", "missing \"operator\"");
  const OperatorSpec* op = nullptr;
  for (const auto& o : cfg.operators)
    if (o.name == cfg.target) op = &o;
  if (!op) rd.fail("/operator", "unknown operator \"" + cfg.target + "\"");
  const auto m = op->domains.size();
  const bool linear_task = cfg.task == "summing" || (cfg.task == "factorize" && m == 1);

  if (linear_task) {
    if (m != 1) rd.fail("/operator", "task " + cfg.task + " needs a linear operator");
    if (!kLinearPhi.count(cfg.phi.kind)) rd.fail("/phi/kind", "unknown phi kind \"" + cfg.phi.kind + "\"");
    if (cfg.phi.kind == "anchored") {
      const auto& X = space(op->domains[0], "/operator");
      if (static_cast<int>(cfg.phi.anchor.size()) != X.dim) rd.fail("/phi/anchor", "anchor dimension mismatch");
    } else if (!cfg.phi.anchor.empty()) {
      rd.fail("/phi/anchor", "anchor applies to the anchored kind only");
    }
    if (!cfg.r && !cfg.p) rd.fail("/exponents", "give r (or p) for the summing exponent");
  } else if (cfg.task == "strongly") {
    if (!kTensorPhi.count(cfg.phi.kind)) rd.fail("/phi/kind", "unknown tensor phi kind \"" + cfg.phi.kind + "\"");
    if (!cfg.r && !cfg.p) rd.fail("/exponents", "give r (or p) for the summing exponent");
  } else if (cfg.task == "multi-ideal") {
    if (cfg.p_j.size() != m) rd.fail("/exponents", "p_j needs one exponent per factor");
    if (!cfg.phis.empty() && cfg.phis.size() != m) rd.fail("/phis", "phis needs one entry per factor");
    for (std::size_t k = 0; k < cfg.phis.size(); ++k) {
      const auto& f = cfg.phis[k];
      if (!kLinearPhi.count(f.kind)) rd.fail("/phis/" + std::to_string(k) + "/kind", "unknown phi kind \"" + f.kind + "\"");
      if (f.kind == "anchored" && static_cast<int>(f.anchor.size()) != space(op->domains[k], "/operator").dim)
        rd.fail("/phis/" + std::to_string(k) + "/anchor", "anchor dimension mismatch");
    }
    if (cfg.p) {
      double s = 0.0;
      for (double x : cfg.p_j) s += 1.0 / x;
      if (std::abs(1.0 / *cfg.p - s) > 1e-12) rd.fail("/exponents/p", "exponent identity violated");
    }
  } else {
    // dimant, factorable, multilinear factorize
    if (!cfg.p) rd.fail("/exponents", "give p (and sigma)");
  }
  return cfg;
}

ojson phi_json(const PhiSpec& s) {
  ojson j;
  j["kind"] = s.kind;
  j["sigma"] = s.sigma;
  if (!s.anchor.empty()) j["anchor"] = s.anchor;
  return j;
}

ojson config_json(const ExperimentConfig& c) {
  ojson j;
  j["schema"] = c.schema;
  j["task"] = c.task;
  j["spaces"] = ojson::array();
  for (const auto& s : c.spaces) {
    ojson o;
    o["name"] = s.name;
    o["kind"] = s.kind;
    o["dim"] = s.dim;
    if (s.kind == "lq") {
      if (std::isinf(s.q)) o["q"] = "inf";
      else o["q"] = s.q;
    } else {
      o["facets"] = s.facets;
    }
    j["spaces"].push_back(o);
  }
  j["operators"] = ojson::array();
  for (const auto& op : c.operators) {
    ojson o;
    o["name"] = op.name;
    o["domains"] = op.domains;
    o["codomain"] = op.codomain;
    o["coefficients"] = op.coefficients;
    j["operators"].push_back(o);
  }
  if (!c.target.empty()) j["operator"] = c.target;
  j["phi"] = phi_json(c.phi);
  if (!c.phis.empty()) {
    j["phis"] = ojson::array();
    for (const auto& f : c.phis) j["phis"].push_back(phi_json(f));
  }
  ojson e;
  if (c.p) e["p"] = *c.p;
  if (c.r) e["r"] = *c.r;
  if (!c.p_j.empty()) e["p_j"] = c.p_j;
  e["sigma"] = c.sigma;
  j["exponents"] = e;
  const auto& s = c.solver;
  j["solver"] = {{"max_iter", s.max_iter},       {"tol_gap", s.tol_gap},         {"mesh_resolution", s.mesh_resolution},
                 {"seed", s.seed},               {"restarts", s.restarts},       {"family_size", s.family_size},
                 {"rank_cap", s.rank_cap},       {"samples", s.samples},         {"threads", s.threads}};
  if (!c.filter.empty()) j["filter"] = c.filter;
  j["timings"] = c.timings;
  return j;
}

// Non-finite values become strings; JSON has no literal for them.
ojson num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

ojson vec_json(const Vector& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

ojson measure_json(const DiscreteMeasure& mu) {
  ojson s = ojson::array();
  for (const auto& x : mu.support) s.push_back(vec_json(x));
  ojson w = ojson::array();
  for (double x : mu.weights) w.push_back(num(x));
  return {{"support", s}, {"weights", w}};
}

ojson summing_json(const SummingReport& r) {
  ojson j;
  j["r"] = num(r.r);
  j["lower"] = num(r.lower_bound);
  j["upper"] = num(r.upper_bound);
  j["gap"] = num(r.gap);
  j["certified"] = r.certified();
  j["gap_open"] = r.gap_open;
  j["iterations"] = r.iterations;
  j["measure"] = measure_json(r.measure);
  ojson fam = ojson::array();
  for (const auto& x : r.lb_family) fam.push_back(vec_json(x));
  j["lb_family"] = fam;
  ojson hist = ojson::array();
  for (const auto& h : r.history) hist.push_back(ojson::array({num(h.lower), num(h.upper), num(h.violation)}));
  j["history"] = hist;
  return j;
}

ojson sigma_json(const SigmaReport& r) {
  ojson j;
  j["class"] = r.kind == SigmaClass::dimant ? "dimant" : "factorable";
  j["p"] = num(r.p);
  j["sigma"] = num(r.sigma);
  j["summary"] = summing_json(r.summary);
  return j;
}

FiniteSpace make_space(const SpaceSpec& s) {
  if (s.kind == "lq") return FiniteSpace::lq(s.dim, s.q, s.name);
  std::vector<Vector> f;
  for (const auto& v : s.facets) f.push_back(to_vector(v));
  return FiniteSpace::polytope(f, s.name);
}

struct Built {
  std::vector<FiniteSpace> domains;
  FiniteSpace codomain;
  MultilinearMap map;
};

Built build_operator(const ExperimentConfig& c) {
  auto find_space = [&](const std::string& name) {
    for (const auto& s : c.spaces)
      if (s.name == name) return make_space(s);
    throw Error(ErrorCode::invalid_argument, "unknown space " + name);
  };
  for (const auto& o : c.operators)
    if (o.name == c.target) {
      std::vector<FiniteSpace> doms;
      for (const auto& d : o.domains) doms.push_back(find_space(d));
      const auto cod = find_space(o.codomain);
      return Built{doms, cod, MultilinearMap::from_flat(doms, cod, o.coefficients)};
    }
  throw Error(ErrorCode::invalid_argument, "unknown operator " + c.target);
}

PhiMap make_phi(const PhiSpec& s, const FiniteSpace& X) {
  if (s.kind == "identity") return PhiMap::identity(X);
  if (s.kind == "sigma_interp") return PhiMap::sigma_interp(X, s.sigma);
  if (s.kind == "square_over_norm") return PhiMap::square_over_norm(X);
  return PhiMap::anchored(X, to_vector(s.anchor));
}

SummingConfig summing_cfg(const SolverSpec& s) {
  SummingConfig c;
  c.max_iter = s.max_iter;
  c.tol_gap = s.tol_gap;
  c.mesh_resolution = s.mesh_resolution;
  c.search.seed = s.seed;
  c.search.restarts = s.restarts;
  c.search.threads = s.threads;
  return c;
}

SigmaConfig sigma_cfg(const SolverSpec& s) {
  SigmaConfig c;
  c.summing = summing_cfg(s);
  c.product_search.seed = s.seed;
  c.product_search.threads = s.threads;
  c.family_size = s.family_size;
  return c;
}

int status_code(bool certified) { return certified ? 0 : 2; }

// Fills `result` and returns the exit code.
int dispatch(const ExperimentConfig& c, ojson& result) {
  if (c.task == "verify-suite") {
    SuiteOptions opt;
    opt.filter = c.filter;
    const auto rows = verify_suite(opt);
    ojson a = ojson::array();
    bool all = true;
    for (const auto& r : rows) {
      ojson checks = ojson::array();
      for (const auto& ch : r.checks)
        if (!ch.timing) checks.push_back({{"label", ch.label}, {"value", num(ch.value)}, {"tol", num(ch.tol)}});
      ojson row{{"id", r.id}, {"title", r.title}, {"pass", r.pass()}, {"checks", checks}};
      if (!r.error.empty()) row["error"] = r.error;
      a.push_back(row);
      all = all && r.pass();
    }
    result["criteria"] = a;
    result["all_pass"] = all;
    return all ? 0 : 1;
  }

  const auto b = build_operator(c);
  const double r = c.r ? *c.r : (c.p ? *c.p : 1.0);
  if (c.task == "summing") {
    const LinearMap T(b.domains[0], b.codomain, b.map.coeffs);
    const auto rep = summing_constant(T, make_phi(c.phi, T.domain), r, summing_cfg(c.solver));
    result["summing"] = summing_json(rep);
    return status_code(rep.certified());
  }
  if (c.task == "strongly") {
    StronglyConfig sc;
    sc.summing = summing_cfg(c.solver);
    sc.family_size = c.solver.family_size;
    const auto phi = c.phi.kind == "identity" ? TensorPhi::identity(b.map.domains)
                                              : TensorPhi::factorable(b.map.domains, c.phi.sigma);
    const auto rep = strongly_constant(b.map, phi, r, sc);
    result["summing"] = summing_json(rep.summary);
    result["family_check"] = num(rep.family_check);
    result["disagreement"] = rep.disagreement;
    result["approx_denominator"] = rep.approx_denominator;
    return status_code(rep.summary.certified() && !rep.disagreement);
  }
  if (c.task == "multi-ideal") {
    std::vector<PhiMap> phis;
    for (std::size_t k = 0; k < b.domains.size(); ++k)
      phis.push_back(c.phis.empty() ? PhiMap::identity(b.domains[k]) : make_phi(c.phis[k], b.domains[k]));
    if (c.p) check_exponent_identity(*c.p, c.p_j);
    MultiIdealConfig mc;
    mc.summing.max_iter = c.solver.max_iter;
    mc.summing.tol_gap = c.solver.tol_gap;
    mc.summing.mesh_resolution = c.solver.mesh_resolution;
    mc.summing.search.seed = c.solver.seed;
    mc.summing.search.threads = c.solver.threads;
    const auto cert = multi_ideal_upper_bound(b.map, phis, c.p_j, mc);
    result["p"] = num(cert.p);
    result["upper"] = num(cert.C);
    result["lower"] = num(cert.lower_bound);
    result["certified"] = cert.certified();
    result["cycles"] = cert.cycles;
    result["stalled"] = cert.stalled;
    ojson ms = ojson::array();
    for (const auto& mu : cert.measures) ms.push_back(measure_json(mu));
    result["measures"] = ms;
    ojson h = ojson::array();
    for (double x : cert.history) h.push_back(num(x));
    result["history"] = h;
    return status_code(cert.certified());
  }
  if (c.task == "dimant" || c.task == "factorable") {
    const auto sc = sigma_cfg(c.solver);
    const auto rep = c.task == "dimant" ? dimant_constant(b.map, *c.p, c.sigma, sc)
                                        : factorable_constant(b.map, *c.p, c.sigma, sc);
    result["sigma_report"] = sigma_json(rep);
    return status_code(rep.certified());
  }
  // factorize
  if (b.domains.size() == 1) {
    const LinearMap T(b.domains[0], b.codomain, b.map.coeffs);
    const auto phi = make_phi(c.phi, T.domain);
    const auto rep = summing_constant(T, phi, r, summing_cfg(c.solver));
    result["summing"] = summing_json(rep);
    if (!rep.certified()) {
      result["refused"] = "no certified measure";
      return 2;
    }
    SeminormConfig nc;
    nc.k_max = c.solver.rank_cap;
    nc.mesh_resolution = c.solver.mesh_resolution;
    const auto f = build_factorization(T, phi, rep, nc);
    const auto d = verify_diagram(f, random_samples(T.domain.dim(), c.solver.samples, c.solver.seed));
    result["factorization"] = {{"norm_bound", num(f.norm_bound)},
                               {"null_dimension", f.model.null_basis.size()},
                               {"continuity", num(f.model.continuity)},
                               {"well_defined_residual", num(f.well_defined_residual)},
                               {"diagram_residual", num(d.diagram_residual)},
                               {"bound_residual", num(d.bound_residual)},
                               {"pass", d.pass}};
    return status_code(d.pass);
  }
  const auto sc = sigma_cfg(c.solver);
  const auto rep = factorable_constant(b.map, *c.p, c.sigma, sc);
  result["sigma_report"] = sigma_json(rep);
  if (!rep.certified()) {
    result["refused"] = "no certified measure";
    return 2;
  }
  const auto rec = final_factorization(b.map, rep, sc, c.solver.samples);
  result["final"] = {{"inequality_residual", num(rec.inequality_residual)},
                     {"domination_residual", num(rec.domination_residual)},
                     {"diagram_residual", num(rec.diagram_residual)},
                     {"gap", num(rec.gap)},
                     {"pass", rec.pass}};
  return status_code(rec.pass);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [ln, cl] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw Error(ErrorCode::parse_error, source + ":" + std::to_string(ln) + ":" + std::to_string(cl) + ": " + msg);
  }
  const PositionIndex idx(text);
  return read_config(Reader(idx, source), root);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

RunResult run_experiment(const ExperimentConfig& cfg) {
  ojson rep;
  rep["schema"] = kConfigSchema;
  rep["environment"] = {{"version", kVersion}, {"seed", cfg.solver.seed}, {"threads", cfg.solver.threads}};
  rep["config"] = config_json(cfg);
  ojson result = ojson::object();
  RunResult out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    out.exit_code = dispatch(cfg, result);
    if (cfg.task == "verify-suite") rep["status"] = out.exit_code == 0 ? "pass" : "fail";
    else rep["status"] = out.exit_code == 0 ? "certified" : "gap-open";
  } catch (const std::exception& e) {
    out.exit_code = 1;
    rep["status"] = "error";
    rep["error"] = e.what();
  }
  rep["result"] = result;
  if (cfg.timings)
    rep["timings"] = {{"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  out.report = rep.dump(2) + "\n";
  return out;
}

}  // namespace phisum
