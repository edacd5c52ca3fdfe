#include "avint/errors.hpp"

#include <sstream>

namespace avint {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << "invalid model (" << v.size() << " violation" << (v.size() == 1 ? "" : "s") << ")";
  for (const auto& s : v) os << "\n  - " << s;
  return os.str();
}

}  // namespace

ModelError::ModelError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

std::string format_k(const std::vector<int>& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) os << ',';
    os << k[i];
  }
  os << ')';
  return os.str();
}

ResonanceError::ResonanceError(std::vector<int> k, double modulus)
    : Error("resonance within working order: <mu,k> = 0 at k=" + format_k(k)),
      k_(std::move(k)),
      modulus_(modulus) {}

}  // namespace avint
