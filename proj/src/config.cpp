#include "adiaframe/config.hpp"

#include <openssl/evp.h>

#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

namespace adiaframe {

using Json = nlohmann::ordered_json;

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SternGerlach: return "stern_gerlach";
    case ScenarioKind::CustomFamily: return "custom_family";
    case ScenarioKind::ThermoCurve: return "thermo_curve";
    case ScenarioKind::Kubo: return "kubo";
    case ScenarioKind::EntropyAudit: return "entropy_audit";
  }
  return "unknown";
}

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::Branching: return "branching";
    case RunMode::MeanForce: return "mean_force";
    case RunMode::Sampled: return "sampled";
    case RunMode::Driven: return "driven";
  }
  return "unknown";
}

namespace {

ScenarioKind kind_from(const std::string& s) {
  for (auto k : {ScenarioKind::SternGerlach, ScenarioKind::CustomFamily, ScenarioKind::ThermoCurve,
                 ScenarioKind::Kubo, ScenarioKind::EntropyAudit})
    if (to_string(k) == s) return k;
  throw ValidationError("field 'scenario': unknown scenario kind '" + s + "'");
}

RunMode mode_from(const std::string& s) {
  for (auto m : {RunMode::Branching, RunMode::MeanForce, RunMode::Sampled, RunMode::Driven})
    if (to_string(m) == s) return m;
  throw ValidationError("field 'mode': unknown mode '" + s + "'");
}

Json complex_to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ValidationError("field '" + field + "': expected a number or [re, im]");
}

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ValidationError("field '" + field + "': expected a matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ValidationError("field '" + field + "': matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k)
      m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)], field);
  }
  return m;
}

// Reads typed fields from one JSON object and records keys it never asked for.
class Fields {
 public:
  Fields(const Json& obj, std::string path, std::vector<std::string>& unknown)
      : obj_(obj), path_(std::move(path)), unknown_(unknown) {
    if (!obj_.is_object()) throw ValidationError("field '" + path_ + "': expected an object");
  }
  ~Fields() {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) unknown_.push_back(name(key));
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const Json* j = find(key);
    if (!j) return;
    try {
      out = j->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("field '" + name(key) + "': wrong type");
    }
  }

  void get_complex(const std::string& key, Complex& out) {
    if (const Json* j = find(key)) out = complex_from_json(*j, name(key));
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

ScenarioConfig from_json(const Json& root, std::vector<std::string>& unknown) {
  ScenarioConfig c;
  Fields top(root, "", unknown);
  std::string kind = to_string(c.kind), mode = to_string(c.mode);
  top.get("scenario", kind);
  top.get("mode", mode);
  c.kind = kind_from(kind);
  c.mode = mode_from(mode);
  top.get("dt", c.dt);
  top.get("duration", c.duration);
  top.get("sample_every", c.sample_every);
  if (const Json* s = top.find("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      throw ValidationError("field 'seed': expected a non-negative integer");
    c.seed = s->get<std::uint64_t>();
  }
  top.get("hbar", c.hbar);
  top.get("beta", c.beta);
  top.get("sigma_E_spacings", c.sigma_spacings);
  if (const Json* e = top.find("eta"); e && !e->is_null()) {
    if (!e->is_number()) throw ValidationError("field 'eta': wrong type");
    c.eta = e->get<double>();
  }

  if (const Json* t = top.find("tolerances")) {
    Fields f(*t, "tolerances", unknown);
    auto& tl = c.tolerances;
    f.get("ledger_relative", tl.ledger_relative);
    f.get("entropy_drift", tl.entropy_drift);
    f.get("branch_energy", tl.branch_energy);
    f.get("thermo_identity", tl.thermo_identity);
    f.get("maxwell", tl.maxwell);
    f.get("kubo_symmetry", tl.kubo_symmetry);
    f.get("entropy_monotonicity", tl.entropy_monotonicity);
  }
  if (const Json* s = top.find("stern_gerlach")) {
    Fields f(*s, "stern_gerlach", unknown);
    auto& sg = c.stern_gerlach;
    f.get("gamma", sg.gamma);
    f.get("mass", sg.mass);
    f.get("B0", sg.B0);
    f.get("b", sg.b);
    f.get("r0", sg.r0);
    f.get("v0", sg.v0);
    f.get_complex("c_plus", sg.c_plus);
    f.get_complex("c_minus", sg.c_minus);
    f.get("atoms", sg.atoms);
  }
  if (const Json* fam = top.find("family")) {
    Fields f(*fam, "family", unknown);
    auto& fm = c.family;
    f.get("coordinates", fm.coordinates);
    if (const Json* terms = f.find("terms")) {
      if (!terms->is_array()) throw ValidationError("field 'family.terms': expected an array");
      for (std::size_t i = 0; i < terms->size(); ++i) {
        const std::string path = "family.terms[" + std::to_string(i) + "]";
        Fields tf((*terms)[i], path, unknown);
        MonomialTerm term;
        if (const Json* m = tf.find("matrix")) {
          term.coefficient = matrix_from_json(*m, path + ".matrix");
        } else {
          throw ValidationError("field '" + path + ".matrix': missing");
        }
        tf.get("exponents", term.exponents);
        fm.terms.push_back(std::move(term));
      }
    }
    f.get("x0", fm.x0);
    f.get("v0", fm.v0);
    f.get("masses", fm.masses);
    f.get("spring", fm.spring);
    if (const Json* a = f.find("amplitudes")) {
      if (!a->is_array()) throw ValidationError("field 'family.amplitudes': expected an array");
      for (const auto& v : *a) fm.amplitudes.push_back(complex_from_json(v, "family.amplitudes"));
    }
    f.get("friction", fm.friction);
  }
  if (const Json* t = top.find("thermo")) {
    Fields f(*t, "thermo", unknown);
    auto& th = c.thermo;
    f.get("spectrum", th.spectrum);
    f.get("dim", th.dim);
    f.get("level_spacing", th.level_spacing);
    f.get("x", th.x);
    f.get("grid_points", th.grid_points);
    f.get("window_low", th.window_low);
    f.get("window_high", th.window_high);
  }
  if (const Json* a = top.find("audit")) {
    Fields f(*a, "audit", unknown);
    f.get("dim", c.audit.dim);
    f.get("samples", c.audit.samples);
  }
  if (const Json* o = top.find("output")) {
    Fields f(*o, "output", unknown);
    f.get("directory", c.output.directory);
    f.get("prefix", c.output.prefix);
  }
  return c;
}

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ValidationError("field '" + field + "': " + msg);
}

}  // namespace

void validate_config(const ScenarioConfig& c) {
  require(c.dt > 0.0, "dt", "must be positive");
  require(c.duration > 0.0, "duration", "must be positive");
  require(c.sample_every > 0, "sample_every", "must be positive");
  require(c.hbar > 0.0, "hbar", "must be positive");
  require(c.sigma_spacings > 0.0, "sigma_E_spacings", "must be positive");
  require(!c.eta || *c.eta > 0.0, "eta", "must be positive");
  const auto& t = c.tolerances;
  require(t.ledger_relative > 0.0, "tolerances.ledger_relative", "must be positive");
  require(t.entropy_drift > 0.0, "tolerances.entropy_drift", "must be positive");
  require(t.branch_energy > 0.0, "tolerances.branch_energy", "must be positive");
  require(t.thermo_identity > 0.0, "tolerances.thermo_identity", "must be positive");
  require(t.maxwell > 0.0, "tolerances.maxwell", "must be positive");
  require(t.kubo_symmetry > 0.0, "tolerances.kubo_symmetry", "must be positive");
  require(t.entropy_monotonicity > 0.0, "tolerances.entropy_monotonicity", "must be positive");
  if (c.mode == RunMode::Sampled || c.kind == ScenarioKind::EntropyAudit ||
      (c.kind == ScenarioKind::ThermoCurve && c.thermo.spectrum == "goe_family"))
    require(c.seed.has_value(), "seed", "required for sampled runs");

  switch (c.kind) {
    case ScenarioKind::SternGerlach: {
      const auto& sg = c.stern_gerlach;
      require(sg.mass > 0.0, "stern_gerlach.mass", "must be positive");
      require(sg.gamma != 0.0, "stern_gerlach.gamma", "must be nonzero");
      require(std::abs(std::norm(sg.c_plus) + std::norm(sg.c_minus) - 1.0) <= 1e-10,
              "stern_gerlach.c_plus", "amplitudes must satisfy |C+|^2 + |C-|^2 = 1");
      require(c.mode != RunMode::Driven, "mode", "driven mode is not available for stern_gerlach");
      require(c.mode != RunMode::Sampled || sg.atoms > 0, "stern_gerlach.atoms", "must be positive");
      break;
    }
    case ScenarioKind::CustomFamily:
    case ScenarioKind::Kubo: {
      const auto& f = c.family;
      require(f.coordinates >= 1, "family.coordinates", "must be at least 1");
      require(!f.terms.empty(), "family.terms", "at least one term is required");
      const auto n = static_cast<std::size_t>(f.coordinates);
      require(f.x0.size() == n, "family.x0", "needs one entry per coordinate");
      try {
        polynomial_family(f.coordinates, f.terms, c.hbar);
      } catch (const ValidationError& e) {
        throw ValidationError(std::string("field 'family.terms': ") + e.what());
      }
      if (c.kind == ScenarioKind::CustomFamily) {
        require(f.v0.size() == n, "family.v0", "needs one entry per coordinate");
        const auto m = static_cast<std::size_t>(f.terms.front().coefficient.rows());
        require(f.amplitudes.size() == m, "family.amplitudes", "needs one entry per level");
        if (c.mode != RunMode::Driven) {
          require(f.masses.size() == n, "family.masses", "needs one entry per coordinate");
          for (double mass : f.masses) require(mass > 0.0, "family.masses", "must be positive");
        }
        require(f.spring.empty() || f.spring.size() == n, "family.spring",
                "needs one entry per coordinate");
        require(f.friction.empty() || f.friction.size() == n, "family.friction",
                "needs one entry per coordinate");
        double norm = 0.0;
        for (auto a : f.amplitudes) norm += std::norm(a);
        require(std::abs(norm - 1.0) <= 1e-10, "family.amplitudes", "must be normalized");
      }
      break;
    }
    case ScenarioKind::ThermoCurve: {
      const auto& th = c.thermo;
      require(th.spectrum == "goe_family" || th.spectrum == "harmonic", "thermo.spectrum",
              "expected goe_family or harmonic");
      require(th.dim >= 2, "thermo.dim", "must be at least 2");
      require(th.level_spacing > 0.0, "thermo.level_spacing", "must be positive");
      require(th.grid_points >= 1, "thermo.grid_points", "must be positive");
      require(0.0 < th.window_low && th.window_low < th.window_high && th.window_high < 1.0,
              "thermo.window_low", "window must satisfy 0 < low < high < 1");
      break;
    }
    case ScenarioKind::EntropyAudit:
      require(c.audit.dim >= 1, "audit.dim", "must be positive");
      require(c.audit.samples >= 1, "audit.samples", "must be positive");
      break;
  }
}

ParsedConfig parse_config(const std::string& text, bool strict) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << "malformed JSON at line " << line << ", column " << column << ": " << e.what();
    throw ParseError(os.str(), line, column);
  }
  ParsedConfig out;
  std::vector<std::string> unknown;
  out.config = from_json(root, unknown);
  if (!unknown.empty()) {
    if (strict) throw ValidationError("unknown key '" + unknown.front() + "'");
    for (const auto& k : unknown) out.warnings.push_back("ignoring unknown key '" + k + "'");
  }
  validate_config(out.config);
  return out;
}

std::string serialize_config(const ScenarioConfig& c) {
  Json j;
  j["scenario"] = to_string(c.kind);
  j["mode"] = to_string(c.mode);
  j["dt"] = c.dt;
  j["duration"] = c.duration;
  j["sample_every"] = c.sample_every;
  if (c.seed) j["seed"] = *c.seed;
  j["hbar"] = c.hbar;
  j["beta"] = c.beta;
  j["sigma_E_spacings"] = c.sigma_spacings;
  if (c.eta) j["eta"] = *c.eta;

  const auto& t = c.tolerances;
  j["tolerances"] = {{"ledger_relative", t.ledger_relative},
                     {"entropy_drift", t.entropy_drift},
                     {"branch_energy", t.branch_energy},
                     {"thermo_identity", t.thermo_identity},
                     {"maxwell", t.maxwell},
                     {"kubo_symmetry", t.kubo_symmetry},
                     {"entropy_monotonicity", t.entropy_monotonicity}};
  const auto& sg = c.stern_gerlach;
  j["stern_gerlach"] = {{"gamma", sg.gamma},
                        {"mass", sg.mass},
                        {"B0", sg.B0},
                        {"b", sg.b},
                        {"r0", sg.r0},
                        {"v0", sg.v0},
                        {"c_plus", complex_to_json(sg.c_plus)},
                        {"c_minus", complex_to_json(sg.c_minus)},
                        {"atoms", sg.atoms}};
  const auto& f = c.family;
  Json terms = Json::array();
  for (const auto& term : f.terms)
    terms.push_back({{"matrix", matrix_to_json(term.coefficient)}, {"exponents", term.exponents}});
  Json amps = Json::array();
  for (auto a : f.amplitudes) amps.push_back(complex_to_json(a));
  j["family"] = {{"coordinates", f.coordinates}, {"terms", terms},       {"x0", f.x0},
                 {"v0", f.v0},                   {"masses", f.masses},   {"spring", f.spring},
                 {"amplitudes", amps},           {"friction", f.friction}};
  const auto& th = c.thermo;
  j["thermo"] = {{"spectrum", th.spectrum},       {"dim", th.dim},
                 {"level_spacing", th.level_spacing}, {"x", th.x},
                 {"grid_points", th.grid_points}, {"window_low", th.window_low},
                 {"window_high", th.window_high}};
  j["audit"] = {{"dim", c.audit.dim}, {"samples", c.audit.samples}};
  j["output"] = {{"directory", c.output.directory}, {"prefix", c.output.prefix}};
  return j.dump(2);
}

std::string config_content_hash(const ScenarioConfig& cfg) {
  const std::string body = serialize_config(cfg);
  const std::string blob = "blob " + std::to_string(body.size()) + std::string(1, '\0') + body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw NumericalError("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

}  // namespace adiaframe
