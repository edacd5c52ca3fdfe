#include "avint/exp_poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace avint {

namespace {

bool same_rate(double a, double b) { return std::abs(a - b) <= kRateMergeTolerance * std::max(1.0, std::max(a, b)); }

}  // namespace

ExpPolyFunction::ExpPolyFunction(std::vector<ExpPolyTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.s < 0) throw Error("exp-polynomial term with negative delta power");
    if (t.nu < -kRateMergeTolerance) throw Error("exp-polynomial term with negative rate");
  }
  normalize();
}

ExpPolyFunction ExpPolyFunction::constant(Complex c) { return ExpPolyFunction({{c, 0, 0.0}}); }

ExpPolyFunction ExpPolyFunction::term(Complex c, int s, double nu) { return ExpPolyFunction({{c, s, nu}}); }

void ExpPolyFunction::normalize() {
  std::erase_if(terms_, [](const ExpPolyTerm& t) { return t.c == Complex{}; });
  for (auto& t : terms_)
    if (std::abs(t.nu) <= kRateMergeTolerance) t.nu = 0.0;

  // Snap nearly equal rates onto one representative before merging.
  std::sort(terms_.begin(), terms_.end(), [](const auto& a, const auto& b) { return a.nu < b.nu; });
  double rep = std::numeric_limits<double>::quiet_NaN();
  for (auto& t : terms_) {
    if (std::isnan(rep) || !same_rate(rep, t.nu)) rep = t.nu;
    t.nu = rep;
  }
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const auto& a, const auto& b) { return a.nu != b.nu ? a.nu < b.nu : a.s < b.s; });
  std::vector<ExpPolyTerm> merged;
  merged.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().nu == t.nu && merged.back().s == t.s)
      merged.back().c += t.c;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const ExpPolyTerm& t) { return t.c == Complex{}; });
  terms_ = std::move(merged);
}

Complex ExpPolyFunction::operator()(double delta) const {
  Complex sum{};
  for (const auto& t : terms_) {
    double basis = std::exp(-t.nu * delta);
    if (t.s > 0) basis *= std::pow(delta, t.s);
    sum += t.c * basis;
  }
  return sum;
}

ExpPolyFunction ExpPolyFunction::derivative() const {
  std::vector<ExpPolyTerm> out;
  for (const auto& t : terms_) {
    if (t.s > 0) out.push_back({t.c * static_cast<double>(t.s), t.s - 1, t.nu});
    if (t.nu != 0.0) out.push_back({-t.nu * t.c, t.s, t.nu});
  }
  return ExpPolyFunction(std::move(out));
}

Complex ExpPolyFunction::constant_part() const {
  Complex c{};
  for (const auto& t : terms_)
    if (t.nu == 0.0 && t.s == 0) c += t.c;
  return c;
}

double ExpPolyFunction::divergent_magnitude() const {
  double m = 0.0;
  for (const auto& t : terms_)
    if (t.nu == 0.0 && t.s > 0) m = std::max(m, std::abs(t.c));
  return m;
}

double ExpPolyFunction::slowest_positive_rate() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_)
    if (t.nu > 0.0) r = std::min(r, t.nu);
  return r;
}

ExpPolyFunction& ExpPolyFunction::operator+=(const ExpPolyFunction& g) {
  terms_.insert(terms_.end(), g.terms_.begin(), g.terms_.end());
  normalize();
  return *this;
}

ExpPolyFunction& ExpPolyFunction::operator-=(const ExpPolyFunction& g) {
  for (const auto& t : g.terms_) terms_.push_back({-t.c, t.s, t.nu});
  normalize();
  return *this;
}

ExpPolyFunction operator*(const ExpPolyFunction& f, const ExpPolyFunction& g) {
  std::vector<ExpPolyTerm> out;
  out.reserve(f.terms_.size() * g.terms_.size());
  for (const auto& a : f.terms_)
    for (const auto& b : g.terms_) out.push_back({a.c * b.c, a.s + b.s, a.nu + b.nu});
  return ExpPolyFunction(std::move(out));
}

ExpPolyFunction operator*(const ExpPolyFunction& f, Complex s) {
  ExpPolyFunction r;
  if (s == Complex{}) return r;
  r.terms_ = f.terms_;
  for (auto& t : r.terms_) t.c *= s;
  r.normalize();
  return r;
}

std::string to_string(const ExpPolyFunction& f) {
  if (f.is_zero()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool lead = true;
  for (const auto& t : f.terms()) {
    if (!lead) os << " + ";
    lead = false;
    os << '(' << t.c.real() << (t.c.imag() < 0 ? "-" : "+") << std::abs(t.c.imag()) << "i)";
    if (t.s) os << "*d^" << t.s;
    if (t.nu != 0.0) os << "*exp(-" << t.nu << "d)";
  }
  return os.str();
}

void CoefficientTraits<ExpPolyFunction>::canonicalize(std::map<BiIndex, ExpPolyFunction>& terms) {
  std::erase_if(terms, [](const auto& kv) { return kv.second.is_zero(); });
}

ExpPolyFunction solve_damped_linear(double lambda, const ExpPolyFunction& f, Complex c0,
                                    std::vector<std::string>* warnings) {
  if (lambda < 0.0) throw Error("damping rate must be nonnegative");
  std::vector<ExpPolyTerm> out;
  Complex homogeneous = c0;
  for (const auto& t : f.terms()) {
    if (same_rate(t.nu, lambda)) {
      out.push_back({-t.c / static_cast<double>(t.s + 1), t.s + 1, lambda});
      continue;
    }
    const double r = lambda - t.nu;
    if (warnings && std::abs(r) < 1e-6) {
      std::ostringstream os;
      os << "near-coincident rates " << lambda << " and " << t.nu << " (gap " << r << ")";
      warnings->push_back(os.str());
    }
    // Antiderivative of delta^s e^{r delta} is e^{r delta} sum_k (-1)^k s!/(s-k)! delta^{s-k} / r^{k+1}.
    double falling = 1.0;  // s!/(s-k)!
    double rpow = r;       // r^{k+1}
    for (int k = 0; k <= t.s; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      out.push_back({-t.c * (sign * falling / rpow), t.s - k, t.nu});
      if (k == t.s) homogeneous += t.c * (sign * falling / rpow);
      falling *= static_cast<double>(t.s - k);
      rpow *= r;
    }
  }
  out.push_back({homogeneous, 0, lambda});
  return ExpPolyFunction(std::move(out));
}

ComplexPolynomial evaluate_at(const ExpPolyPolynomial& p, double delta) {
  ComplexPolynomial r(p.dim());
  for (const auto& [idx, f] : p.terms()) r.add_term(idx, f(delta));
  r.canonicalize();
  return r;
}

ExpPolyPolynomial lift_constant(const ComplexPolynomial& p) {
  ExpPolyPolynomial r(p.dim());
  for (const auto& [idx, c] : p.terms()) r.add_term(idx, ExpPolyFunction::constant(c));
  r.canonicalize();
  return r;
}

}  // namespace avint
