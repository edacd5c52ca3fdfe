#include "avint/polynomial.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace avint {

BiIndex::BiIndex(std::vector<int> a, std::vector<int> b) : alpha(std::move(a)), beta(std::move(b)) {
  if (alpha.size() != beta.size())
    throw DimensionMismatch("alpha and beta lengths differ: " + std::to_string(alpha.size()) + " vs " +
                            std::to_string(beta.size()));
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j] < 0 || beta[j] < 0) throw Error("negative exponent in multi-index");
}

BiIndex BiIndex::zero(std::size_t n) {
  BiIndex idx;
  idx.alpha.assign(n, 0);
  idx.beta.assign(n, 0);
  return idx;
}

BiIndex BiIndex::from_flat(std::span<const int> exponents) {
  if (exponents.size() % 2 != 0) throw DimensionMismatch("flat exponent vector must have even length");
  const std::size_t n = exponents.size() / 2;
  return BiIndex(std::vector<int>(exponents.begin(), exponents.begin() + static_cast<std::ptrdiff_t>(n)),
                 std::vector<int>(exponents.begin() + static_cast<std::ptrdiff_t>(n), exponents.end()));
}

int BiIndex::degree() const noexcept {
  return std::accumulate(alpha.begin(), alpha.end(), 0) + std::accumulate(beta.begin(), beta.end(), 0);
}

std::vector<int> BiIndex::shift() const {
  std::vector<int> k(dim());
  for (std::size_t j = 0; j < dim(); ++j) k[j] = beta[j] - alpha[j];
  return k;
}

std::strong_ordering BiIndex::operator<=>(const BiIndex& other) const {
  if (auto c = degree() <=> other.degree(); c != 0) return c;
  if (auto c = alpha <=> other.alpha; c != 0) return c;
  return beta <=> other.beta;
}

BiIndex operator+(const BiIndex& a, const BiIndex& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("multi-index dimension mismatch");
  BiIndex r = a;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    r.alpha[j] += b.alpha[j];
    r.beta[j] += b.beta[j];
  }
  return r;
}

std::string to_string(const BiIndex& idx) {
  std::ostringstream os;
  os << "([";
  for (std::size_t j = 0; j < idx.dim(); ++j) os << (j ? "," : "") << idx.alpha[j];
  os << "],[";
  for (std::size_t j = 0; j < idx.dim(); ++j) os << (j ? "," : "") << idx.beta[j];
  os << "])";
  return os.str();
}

void CoefficientTraits<Complex>::canonicalize(std::map<BiIndex, Complex>& terms) {
  double largest = 0.0;
  for (const auto& [idx, c] : terms) largest = std::max(largest, std::abs(c));
  const double threshold = kCanonicalZeroRelative * largest;
  std::erase_if(terms, [threshold](const auto& kv) {
    return kv.second == Complex{} || std::abs(kv.second) <= threshold;
  });
}

LinearMap2n::LinearMap2n(Eigen::MatrixXcd matrix) : m_(std::move(matrix)) {
  if (m_.rows() != m_.cols() || m_.rows() % 2 != 0)
    throw DimensionMismatch("linear map must be square with even size");
  n_ = static_cast<std::size_t>(m_.rows() / 2);
}

LinearMap2n LinearMap2n::identity(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(2 * n);
  return LinearMap2n(Eigen::MatrixXcd::Identity(d, d));
}

LinearMap2n LinearMap2n::inverse() const { return LinearMap2n(m_.fullPivLu().inverse()); }

LinearMap2n LinearMap2n::operator*(const LinearMap2n& other) const {
  if (other.n_ != n_) throw DimensionMismatch("linear map composition dimension mismatch");
  return LinearMap2n(m_ * other.m_);
}

std::vector<Complex> LinearMap2n::apply(std::span<const Complex> v) const {
  if (v.size() != 2 * n_) throw DimensionMismatch("linear map applied to vector of wrong length");
  const auto d = static_cast<Eigen::Index>(2 * n_);
  Eigen::VectorXcd x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = v[static_cast<std::size_t>(i)];
  const Eigen::VectorXcd y = m_ * x;
  return {y.data(), y.data() + d};
}

Eigen::MatrixXd structure_matrix(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  j.topRightCorner(k, k) = Eigen::MatrixXd::Identity(k, k);
  j.bottomLeftCorner(k, k) = -Eigen::MatrixXd::Identity(k, k);
  return j;
}

double LinearMap2n::symplectic_residual() const {
  const Eigen::MatrixXcd j = structure_matrix(n_).cast<Complex>();
  return (m_.transpose() * j * m_ - j).cwiseAbs().maxCoeff();
}

namespace {

template <class T>
T evaluate_impl(const ComplexPolynomial& p, std::span<const T> point) {
  const std::size_t n = p.dim();
  if (point.size() != 2 * n) throw DimensionMismatch("evaluation point must have length 2n");
  const int d = std::max(p.degree(), 0);
  std::vector<std::vector<T>> pw(2 * n, std::vector<T>(static_cast<std::size_t>(d) + 1, T(1)));
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (int k = 1; k <= d; ++k) pw[i][static_cast<std::size_t>(k)] = pw[i][static_cast<std::size_t>(k) - 1] * point[i];
  Complex sum{};
  for (const auto& [idx, c] : p.terms()) {
    T m(1);
    for (std::size_t i = 0; i < 2 * n; ++i) m *= pw[i][static_cast<std::size_t>(idx.exponent(i))];
    sum += c * m;
  }
  if constexpr (std::is_same_v<T, double>)
    return sum.real();
  else
    return sum;
}

}  // namespace

Complex evaluate(const ComplexPolynomial& p, std::span<const Complex> point) {
  return evaluate_impl<Complex>(p, point);
}

double evaluate_real(const ComplexPolynomial& p, std::span<const double> point) {
  return evaluate_impl<double>(p, point);
}

std::vector<double> hamiltonian_vector_field(const ComplexPolynomial& h, std::span<const double> point) {
  const std::size_t n = h.dim();
  if (point.size() != 2 * n) throw DimensionMismatch("vector field point must have length 2n");
  std::vector<double> out(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = evaluate_real(derivative(h, n + j), point);
    out[n + j] = -evaluate_real(derivative(h, j), point);
  }
  return out;
}

double max_norm(const ComplexPolynomial& p) {
  double m = 0.0;
  for (const auto& [idx, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

double coefficient_norm(const ComplexPolynomial& p) {
  double s = 0.0;
  for (const auto& [idx, c] : p.terms()) s += std::norm(c);
  return std::sqrt(s);
}

double max_difference(const ComplexPolynomial& p, const ComplexPolynomial& q) {
  p.require_same_dim(q);
  double m = 0.0;
  for (const auto& [idx, c] : p.terms()) m = std::max(m, std::abs(c - q.coefficient(idx)));
  for (const auto& [idx, c] : q.terms())
    if (!p.terms().contains(idx)) m = std::max(m, std::abs(c));
  return m;
}

ComplexPolynomial conj(const ComplexPolynomial& p) {
  return map_coefficients(p, [](const BiIndex&, const Complex& c) { return std::conj(c); });
}

ComplexPolynomial real_part(const ComplexPolynomial& p) {
  return map_coefficients(p, [](const BiIndex&, const Complex& c) { return Complex(c.real(), 0.0); });
}

std::string to_string(const ComplexPolynomial& p, bool complex_vars) {
  if (p.is_zero()) return "0";
  const char* first = complex_vars ? "z" : "x";
  const char* second = complex_vars ? "w" : "y";
  std::ostringstream os;
  os.precision(17);
  bool lead = true;
  for (const auto& [idx, c] : p.terms()) {
    if (!lead) os << " + ";
    lead = false;
    os << '(' << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    for (std::size_t j = 0; j < idx.dim(); ++j) {
      if (idx.alpha[j]) os << '*' << first << (j + 1) << (idx.alpha[j] > 1 ? "^" + std::to_string(idx.alpha[j]) : "");
      if (idx.beta[j]) os << '*' << second << (j + 1) << (idx.beta[j] > 1 ? "^" + std::to_string(idx.beta[j]) : "");
    }
  }
  return os.str();
}

}  // namespace avint
