#include "avint/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "avint/errors.hpp"

namespace avint {

using nlohmann::json;

namespace {

class Collector {
 public:
  explicit Collector(const json& root) : root_(root) {}

  template <class T>
  bool get(const json& obj, const std::string& key, T& out, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      add(where + key + " is missing");
      return false;
    }
    try {
      out = obj.at(key).get<T>();
      return true;
    } catch (const json::exception&) {
      add(where + key + " has the wrong type");
      return false;
    }
  }

  void add(std::string v) { violations_.push_back(std::move(v)); }
  std::vector<std::string>& violations() { return violations_; }
  const json& root() const { return root_; }

 private:
  const json& root_;
  std::vector<std::string> violations_;
};

}  // namespace

ModelSpec model_from_json(const json& j) {
  if (!j.is_object()) throw ModelError({"model file must be a JSON object"});
  Collector col(j);
  ModelSpec spec;

  int version = 0;
  if (col.get(j, "schema_version", version, "") && version != kModelSchemaVersion)
    col.add("schema_version " + std::to_string(version) + " is not supported (expected " +
            std::to_string(kModelSchemaVersion) + ")");
  col.get(j, "n1", spec.n1, "");
  col.get(j, "n2", spec.n2, "");
  col.get(j, "n", spec.n, "");

  auto optional_array = [&](const char* key) -> const json* {
    if (!j.contains(key)) return nullptr;
    if (!j.at(key).is_array()) {
      col.add(std::string(key) + " must be an array");
      return nullptr;
    }
    return &j.at(key);
  };
  if (const json* f = optional_array("focus")) {
    for (std::size_t i = 0; i < f->size(); ++i) {
      FocusBlock b;
      const std::string where = "focus[" + std::to_string(i) + "].";
      col.get((*f)[i], "a", b.a, where);
      col.get((*f)[i], "b", b.b, where);
      spec.focus.push_back(b);
    }
  }
  for (auto [key, dest] : {std::pair{"omega", &spec.omega}, std::pair{"lambda", &spec.lambda}}) {
    if (const json* a = optional_array(key)) {
      for (std::size_t i = 0; i < a->size(); ++i) {
        if (!(*a)[i].is_number()) {
          col.add(std::string(key) + "[" + std::to_string(i) + "] must be a number");
          continue;
        }
        dest->push_back((*a)[i].get<double>());
      }
    }
  }

  const bool dims_ok = spec.n >= 1 && spec.n <= 64;
  if (!dims_ok && j.contains("n")) col.add("n must be between 1 and 64");
  spec.hstar = ComplexPolynomial(dims_ok ? static_cast<std::size_t>(spec.n) : 0);
  if (!j.contains("H_star")) {
    col.add("H_star is missing");
  } else if (const json* terms = optional_array("H_star"); terms && dims_ok) {
    for (std::size_t i = 0; i < terms->size(); ++i) {
      const json& t = (*terms)[i];
      const std::string where = "H_star[" + std::to_string(i) + "].";
      std::vector<int> alpha;
      std::vector<int> beta;
      double re = 0.0;
      double im = 0.0;
      bool ok = col.get(t, "alpha", alpha, where) & col.get(t, "beta", beta, where) & col.get(t, "re", re, where);
      if (t.is_object() && t.contains("im")) ok &= col.get(t, "im", im, where);
      if (!ok) continue;
      if (alpha.size() != static_cast<std::size_t>(spec.n) || beta.size() != static_cast<std::size_t>(spec.n)) {
        col.add(where + "alpha/beta must have length n = " + std::to_string(spec.n));
        continue;
      }
      bool negative = false;
      int degree = 0;
      for (int v : alpha) negative |= v < 0, degree += v;
      for (int v : beta) negative |= v < 0, degree += v;
      if (negative) {
        col.add(where + "exponents must be nonnegative");
        continue;
      }
      if (im != 0.0) col.add(where + "im = " + std::to_string(im) + ": H_star must have real coefficients");
      if (degree < 3) col.add(where + "degree " + std::to_string(degree) + " < 3: H_star must vanish to order 3");
      if (!std::isfinite(re)) col.add(where + "re is not finite");
      if (im != 0.0 || degree < 3 || !std::isfinite(re)) continue;
      spec.hstar.add_term(BiIndex(alpha, beta), re);
    }
    spec.hstar.canonicalize();
  }

  // Structural problems first, then whatever invariants can still be judged.
  for (auto& v : spec.violations()) col.add(std::move(v));
  if (!col.violations().empty()) throw ModelError(std::move(col.violations()));
  return spec;
}

nlohmann::ordered_json model_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["schema_version"] = kModelSchemaVersion;
  j["n1"] = spec.n1;
  j["n2"] = spec.n2;
  j["n"] = spec.n;
  j["focus"] = nlohmann::ordered_json::array();
  for (const auto& f : spec.focus) j["focus"].push_back({{"a", f.a}, {"b", f.b}});
  j["omega"] = spec.omega;
  j["lambda"] = spec.lambda;
  j["H_star"] = nlohmann::ordered_json::array();
  for (const auto& [idx, c] : spec.hstar.terms())
    j["H_star"].push_back({{"alpha", idx.alpha}, {"beta", idx.beta}, {"re", c.real()}, {"im", c.imag()}});
  return j;
}

ModelSpec parse_model_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError({std::string("malformed JSON: ") + e.what()});
  }
  return model_from_json(j);
}

ModelSpec parse_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError({"cannot open model file " + path});
  std::ostringstream os;
  os << in.rdbuf();
  return parse_model_text(os.str());
}

}  // namespace avint
