#include "avint/spectrum.hpp"

#include <cmath>
#include <limits>

namespace avint {

BlockKind BlockLayout::kind(std::size_t j) const {
  const auto i = static_cast<int>(j);
  if (i < 2 * n1) return BlockKind::focus;
  if (i < n2) return BlockKind::elliptic;
  return BlockKind::hyperbolic;
}

std::vector<std::string> ModelSpec::violations() const {
  std::vector<std::string> v;
  auto add = [&v](const std::string& s) { v.push_back(s); };
  if (n < 1) add("n must be at least 1");
  if (n1 < 0) add("n1 must be nonnegative");
  if (!(2 * n1 <= n2 && n2 <= n)) add("block bounds must satisfy 2*n1 <= n2 <= n");
  if (static_cast<int>(focus.size()) != n1)
    add("expected " + std::to_string(n1) + " focus blocks, got " + std::to_string(focus.size()));
  if (static_cast<int>(omega.size()) != n2 - 2 * n1)
    add("expected " + std::to_string(n2 - 2 * n1) + " elliptic frequencies, got " + std::to_string(omega.size()));
  if (static_cast<int>(lambda.size()) != n - n2)
    add("expected " + std::to_string(n - n2) + " hyperbolic exponents, got " + std::to_string(lambda.size()));
  for (std::size_t j = 0; j < focus.size(); ++j) {
    if (!std::isfinite(focus[j].a) || !std::isfinite(focus[j].b)) add("focus block " + std::to_string(j) + " not finite");
    if (focus[j].a == 0.0 && focus[j].b == 0.0)
      add("degenerate equilibrium: focus block " + std::to_string(j) + " has a = b = 0");
  }
  for (std::size_t k = 0; k < omega.size(); ++k)
    if (!(std::isfinite(omega[k]) && omega[k] != 0.0))
      add("degenerate equilibrium: omega[" + std::to_string(k) + "] must be finite and nonzero");
  for (std::size_t l = 0; l < lambda.size(); ++l)
    if (!(std::isfinite(lambda[l]) && lambda[l] != 0.0))
      add("degenerate equilibrium: lambda[" + std::to_string(l) + "] must be finite and nonzero");
  if (n >= 1 && hstar.dim() != static_cast<std::size_t>(n)) {
    add("H_star has dimension " + std::to_string(hstar.dim()) + " but n = " + std::to_string(n));
  } else {
    for (const auto& [idx, c] : hstar.terms()) {
      if (c.imag() != 0.0) add("H_star coefficient at " + to_string(idx) + " is not real");
      if (!std::isfinite(c.real())) add("H_star coefficient at " + to_string(idx) + " is not finite");
      if (idx.degree() < 3) add("H_star term " + to_string(idx) + " has degree " + std::to_string(idx.degree()) + " < 3");
    }
  }
  return v;
}

void ModelSpec::validate() const {
  if (auto v = violations(); !v.empty()) throw ModelError(std::move(v));
}

EigenvalueVector eigenvalues(const ModelSpec& spec) {
  spec.validate();
  EigenvalueVector ev;
  ev.mu.resize(static_cast<std::size_t>(spec.n));
  for (int j = 0; j < spec.n1; ++j) {
    const auto& f = spec.focus[static_cast<std::size_t>(j)];
    ev.mu[static_cast<std::size_t>(2 * j)] = Complex(-f.a, -f.b);
    ev.mu[static_cast<std::size_t>(2 * j + 1)] = Complex(-f.a, f.b);
  }
  for (int k = 2 * spec.n1; k < spec.n2; ++k)
    ev.mu[static_cast<std::size_t>(k)] = Complex(0.0, -spec.omega[static_cast<std::size_t>(k - 2 * spec.n1)]);
  for (int l = spec.n2; l < spec.n; ++l)
    ev.mu[static_cast<std::size_t>(l)] = Complex(spec.lambda[static_cast<std::size_t>(l - spec.n2)], 0.0);
  return ev;
}

bool matches_block_pattern(const EigenvalueVector& mu, const BlockLayout& layout) {
  if (static_cast<int>(mu.size()) != layout.n) return false;
  for (int j = 0; j < layout.n1; ++j)
    if (mu[static_cast<std::size_t>(2 * j)] != std::conj(mu[static_cast<std::size_t>(2 * j + 1)])) return false;
  for (int k = 2 * layout.n1; k < layout.n2; ++k)
    if (mu[static_cast<std::size_t>(k)].real() != 0.0) return false;
  for (int l = layout.n2; l < layout.n; ++l)
    if (mu[static_cast<std::size_t>(l)].imag() != 0.0) return false;
  return true;
}

Complex pairing(const EigenvalueVector& mu, std::span<const int> k) {
  if (k.size() != mu.size()) throw DimensionMismatch("pairing: k and mu lengths differ");
  Complex s{};
  for (std::size_t j = 0; j < k.size(); ++j) s += static_cast<double>(k[j]) * mu[j];
  return s;
}

namespace {

BiIndex xy_index(std::size_t n, std::initializer_list<std::pair<std::size_t, int>> x,
                 std::initializer_list<std::pair<std::size_t, int>> y) {
  BiIndex idx = BiIndex::zero(n);
  for (auto [j, e] : x) idx.alpha[j] += e;
  for (auto [j, e] : y) idx.beta[j] += e;
  return idx;
}

}  // namespace

ComplexPolynomial build_H2(const ModelSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n);
  ComplexPolynomial h(n);
  for (int j = 0; j < spec.n1; ++j) {
    const auto p = static_cast<std::size_t>(2 * j);
    const auto q = p + 1;
    const auto& f = spec.focus[static_cast<std::size_t>(j)];
    h.add_term(xy_index(n, {{p, 1}}, {{p, 1}}), -f.a);
    h.add_term(xy_index(n, {{q, 1}}, {{q, 1}}), -f.a);
    h.add_term(xy_index(n, {{q, 1}}, {{p, 1}}), f.b);
    h.add_term(xy_index(n, {{p, 1}}, {{q, 1}}), -f.b);
  }
  for (int k = 2 * spec.n1; k < spec.n2; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double w = spec.omega[static_cast<std::size_t>(k - 2 * spec.n1)];
    h.add_term(xy_index(n, {{kk, 2}}, {}), w / 2);
    h.add_term(xy_index(n, {}, {{kk, 2}}), w / 2);
  }
  for (int l = spec.n2; l < spec.n; ++l) {
    const auto ll = static_cast<std::size_t>(l);
    h.add_term(xy_index(n, {{ll, 1}}, {{ll, 1}}), spec.lambda[static_cast<std::size_t>(l - spec.n2)]);
  }
  h.canonicalize();
  return h;
}

ComplexPolynomial build_hamiltonian(const ModelSpec& spec) { return build_H2(spec) + spec.hstar; }

namespace {

// Calls f(k) for each k != 0 with |k|_1 <= order whose first nonzero entry is
// positive.
template <class F>
void for_each_half_lattice(std::size_t n, int order, F&& f) {
  std::vector<int> k(n, 0);
  auto rec = [&](auto&& self, std::size_t j, int budget, bool leading) -> void {
    if (j == n) {
      if (!leading) f(k);
      return;
    }
    const int lo = leading ? 0 : -budget;
    for (int v = lo; v <= budget; ++v) {
      k[j] = v;
      self(self, j + 1, budget - std::abs(v), leading && v == 0);
    }
    k[j] = 0;
  };
  rec(rec, 0, order, true);
}

// Some degree d in (2, order] with d >= |k|_1 and d = |k|_1 mod 2 exists.
bool realised(std::span<const int> k, int order) {
  int l1 = 0;
  for (int v : k) l1 += std::abs(v);
  for (int d = std::max(3, l1); d <= order; ++d)
    if ((d - l1) % 2 == 0) return true;
  return false;
}

}  // namespace

DivisorReport divisor_scan(const EigenvalueVector& mu, int order, double near_tolerance) {
  if (order < 3) throw Error("divisor scan requires order >= 3");
  DivisorReport report;
  report.order = order;
  report.near_tolerance = near_tolerance;
  report.min_modulus = std::numeric_limits<double>::infinity();
  report.min_nonzero_modulus = std::numeric_limits<double>::infinity();
  for_each_half_lattice(mu.size(), order, [&](const std::vector<int>& k) {
    if (!realised(k, order)) return;
    ++report.scanned;
    double scale = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) scale += std::abs(mu[j]) * std::abs(k[j]);
    const double m = std::abs(pairing(mu, k));
    if (m < report.min_modulus) {
      report.min_modulus = m;
      report.argmin = k;
    }
    if (m <= 1e-13 * scale) {
      report.exact_zeros.push_back({k, m});
      return;
    }
    report.min_nonzero_modulus = std::min(report.min_nonzero_modulus, m);
    ++report.decade_histogram[static_cast<int>(std::floor(std::log10(m)))];
    if (m < near_tolerance) report.near_zeros.push_back({k, m});
  });
  return report;
}

}  // namespace avint
