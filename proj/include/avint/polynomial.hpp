#pragma once

// Sparse multivariate polynomials on 2n variables.
//
// Variables are split into two halves: (x_1..x_n, y_1..y_n) in real
// coordinates or (z_1..z_n, w_1..w_n) in complex ones. A monomial is
// addressed by a BiIndex (alpha, beta) meaning x^alpha y^beta (resp.
// z^alpha w^beta). Flat variable index i < n refers to alpha_i, i >= n to
// beta_{i-n}.
//
// SparsePolynomial is templated on the coefficient ring so that the same
// bracket / substitution code serves plain complex coefficients and the
// delta-dependent exp-polynomial coefficients of the averaging flow.

#include <algorithm>
#include <compare>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "avint/errors.hpp"

namespace avint {

using Complex = std::complex<double>;

inline constexpr int kInfiniteDegree = std::numeric_limits<int>::max();

// Coefficients below this fraction of the largest coefficient modulus are
// treated as zero.
inline constexpr double kCanonicalZeroRelative = 1e-15;

struct BiIndex {
  std::vector<int> alpha;
  std::vector<int> beta;

  BiIndex() = default;
  BiIndex(std::vector<int> a, std::vector<int> b);
  static BiIndex zero(std::size_t n);
  // Exponent vector of length 2n: alpha followed by beta.
  static BiIndex from_flat(std::span<const int> exponents);

  std::size_t dim() const noexcept { return alpha.size(); }
  int degree() const noexcept;
  int exponent(std::size_t flat) const { return flat < dim() ? alpha[flat] : beta[flat - dim()]; }
  int& exponent(std::size_t flat) { return flat < dim() ? alpha[flat] : beta[flat - dim()]; }
  // beta - alpha
  std::vector<int> shift() const;

  bool operator==(const BiIndex&) const = default;
  // Graded lexicographic: (|alpha|+|beta|, alpha, beta).
  std::strong_ordering operator<=>(const BiIndex& other) const;
};

BiIndex operator+(const BiIndex& a, const BiIndex& b);

std::string to_string(const BiIndex& idx);

// Per-ring behaviour a coefficient type has to provide.
template <class C>
struct CoefficientTraits;

template <>
struct CoefficientTraits<Complex> {
  static void canonicalize(std::map<BiIndex, Complex>& terms);
};

template <class C>
class SparsePolynomial {
 public:
  using Coefficient = C;
  using TermMap = std::map<BiIndex, C>;

  SparsePolynomial() = default;
  explicit SparsePolynomial(std::size_t n) : n_(n) {}
  SparsePolynomial(std::size_t n, TermMap terms) : n_(n), terms_(std::move(terms)) {
    for (const auto& [idx, c] : terms_) check_index(idx);
    canonicalize();
  }

  static SparsePolynomial monomial(BiIndex idx, C c) {
    SparsePolynomial p(idx.dim());
    p.add_term(idx, std::move(c));
    p.canonicalize();
    return p;
  }
  static SparsePolynomial constant(std::size_t n, C c) { return monomial(BiIndex::zero(n), std::move(c)); }
  // The flat variable v_i as a polynomial.
  static SparsePolynomial variable(std::size_t n, std::size_t flat, C one) {
    BiIndex idx = BiIndex::zero(n);
    idx.exponent(flat) = 1;
    return monomial(std::move(idx), std::move(one));
  }

  std::size_t dim() const noexcept { return n_; }
  const TermMap& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }

  // Highest total degree, -1 for the zero polynomial.
  int degree() const noexcept { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

  C coefficient(const BiIndex& idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? C{} : it->second;
  }

  // Accumulates without canonicalizing; call canonicalize() once done.
  void add_term(const BiIndex& idx, const C& c) {
    check_index(idx);
    auto [it, inserted] = terms_.try_emplace(idx, c);
    if (!inserted) it->second += c;
  }
  void canonicalize() { CoefficientTraits<C>::canonicalize(terms_); }

  SparsePolynomial& operator+=(const SparsePolynomial& q) {
    require_same_dim(q);
    for (const auto& [idx, c] : q.terms_) add_term(idx, c);
    canonicalize();
    return *this;
  }
  SparsePolynomial& operator-=(const SparsePolynomial& q) {
    require_same_dim(q);
    for (const auto& [idx, c] : q.terms_) add_term(idx, c * Complex(-1.0));
    canonicalize();
    return *this;
  }
  friend SparsePolynomial operator+(SparsePolynomial p, const SparsePolynomial& q) { return p += q; }
  friend SparsePolynomial operator-(SparsePolynomial p, const SparsePolynomial& q) { return p -= q; }
  friend SparsePolynomial operator-(const SparsePolynomial& p) { return p * Complex(-1.0); }

  friend SparsePolynomial operator*(const SparsePolynomial& p, Complex s) {
    SparsePolynomial r(p.n_);
    if (s == Complex{}) return r;
    for (const auto& [idx, c] : p.terms_) r.terms_.emplace(idx, c * s);
    r.canonicalize();
    return r;
  }
  friend SparsePolynomial operator*(Complex s, const SparsePolynomial& p) { return p * s; }

  friend SparsePolynomial operator*(const SparsePolynomial& p, const SparsePolynomial& q) {
    p.require_same_dim(q);
    SparsePolynomial r(p.n_);
    for (const auto& [a, ca] : p.terms_)
      for (const auto& [b, cb] : q.terms_) r.add_term(a + b, ca * cb);
    r.canonicalize();
    return r;
  }

  bool operator==(const SparsePolynomial&) const = default;

  void require_same_dim(const SparsePolynomial& q) const {
    if (q.n_ != n_)
      throw DimensionMismatch("polynomial dimension mismatch: " + std::to_string(n_) + " vs " +
                              std::to_string(q.n_));
  }

 private:
  void check_index(const BiIndex& idx) const {
    if (idx.alpha.size() != n_ || idx.beta.size() != n_)
      throw DimensionMismatch("multi-index of length " + std::to_string(idx.alpha.size()) + "/" +
                              std::to_string(idx.beta.size()) + " in a polynomial of dimension " +
                              std::to_string(n_));
  }

  std::size_t n_ = 0;
  TermMap terms_;
};

using ComplexPolynomial = SparsePolynomial<Complex>;

// Lowest total degree over stored terms, kInfiniteDegree for zero.
template <class C>
int min_degree(const SparsePolynomial<C>& p) {
  return p.is_zero() ? kInfiniteDegree : p.terms().begin()->first.degree();
}

template <class C>
SparsePolynomial<C> truncate_degree(const SparsePolynomial<C>& p, int max_degree) {
  SparsePolynomial<C> r(p.dim());
  for (const auto& [idx, c] : p.terms()) {
    if (idx.degree() > max_degree) break;
    r.add_term(idx, c);
  }
  return r;
}

// Homogeneous component of a single degree.
template <class C>
SparsePolynomial<C> degree_part(const SparsePolynomial<C>& p, int degree) {
  SparsePolynomial<C> r(p.dim());
  for (const auto& [idx, c] : p.terms())
    if (idx.degree() == degree) r.add_term(idx, c);
  return r;
}

// Applies f to every coefficient, keeping the index.
template <class C, class F>
auto map_coefficients(const SparsePolynomial<C>& p, F&& f) {
  using R = std::decay_t<decltype(f(std::declval<const BiIndex&>(), std::declval<const C&>()))>;
  SparsePolynomial<R> r(p.dim());
  for (const auto& [idx, c] : p.terms()) r.add_term(idx, f(idx, c));
  r.canonicalize();
  return r;
}

// {f, g} = sum_j (df/dw_j dg/dz_j - df/dz_j dg/dw_j). With H2 = sum mu_j z_j w_j
// this gives {z^a w^b, H2} = <mu, b - a> z^a w^b. When only_degree >= 0 only
// the output component of that total degree is produced.
template <class C>
SparsePolynomial<C> poisson_bracket(const SparsePolynomial<C>& f, const SparsePolynomial<C>& g,
                                    int only_degree = -1) {
  f.require_same_dim(g);
  const std::size_t n = f.dim();
  SparsePolynomial<C> r(n);
  for (const auto& [a, ca] : f.terms()) {
    const int da = a.degree();
    for (const auto& [b, cb] : g.terms()) {
      if (only_degree >= 0 && da + b.degree() - 2 != only_degree) continue;
      BiIndex sum;
      bool have_sum = false;
      C product{};
      bool have_product = false;
      for (std::size_t j = 0; j < n; ++j) {
        const int factor = a.beta[j] * b.alpha[j] - a.alpha[j] * b.beta[j];
        if (factor == 0) continue;
        if (!have_sum) {
          sum = a + b;
          have_sum = true;
        }
        if (!have_product) {
          product = ca * cb;
          have_product = true;
        }
        BiIndex target = sum;
        --target.alpha[j];
        --target.beta[j];
        r.add_term(target, product * Complex(static_cast<double>(factor)));
      }
    }
  }
  r.canonicalize();
  return r;
}

// Partial derivative with respect to flat variable `flat`.
template <class C>
SparsePolynomial<C> derivative(const SparsePolynomial<C>& p, std::size_t flat) {
  SparsePolynomial<C> r(p.dim());
  for (const auto& [idx, c] : p.terms()) {
    const int e = idx.exponent(flat);
    if (e == 0) continue;
    BiIndex d = idx;
    --d.exponent(flat);
    r.add_term(d, c * Complex(static_cast<double>(e)));
  }
  r.canonicalize();
  return r;
}

// A complex 2n x 2n matrix acting on the coordinate column (v_1..v_2n).
class LinearMap2n {
 public:
  LinearMap2n() = default;
  explicit LinearMap2n(Eigen::MatrixXcd matrix);
  static LinearMap2n identity(std::size_t n);

  std::size_t dim() const noexcept { return n_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return m_; }

  LinearMap2n inverse() const;
  // (this * other)(v) = this(other(v)).
  LinearMap2n operator*(const LinearMap2n& other) const;
  std::vector<Complex> apply(std::span<const Complex> v) const;

  // || A^T J A - J ||_max with J = [[0, I], [-I, 0]].
  double symplectic_residual() const;

 private:
  std::size_t n_ = 0;
  Eigen::MatrixXcd m_;
};

// The standard structure matrix J = [[0, I], [-I, 0]] of dy^dx.
Eigen::MatrixXd structure_matrix(std::size_t n);

// Composition p o A: the result's variables v relate to p's variables u
// through u = A v.
template <class C>
SparsePolynomial<C> substitute_linear(const SparsePolynomial<C>& p, const LinearMap2n& a) {
  const std::size_t n = p.dim();
  if (a.dim() != n)
    throw DimensionMismatch("linear map of dimension " + std::to_string(a.dim()) +
                            " applied to polynomial of dimension " + std::to_string(n));
  SparsePolynomial<C> r(n);
  if (p.is_zero()) return r;
  const int max_deg = p.degree();

  // powers[i][k] = (sum_j A_ij v_j)^k
  std::vector<std::vector<ComplexPolynomial>> powers(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    ComplexPolynomial form(n);
    for (std::size_t j = 0; j < 2 * n; ++j) {
      const Complex aij = a.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (aij == Complex{}) continue;
      BiIndex var = BiIndex::zero(n);
      var.exponent(j) = 1;
      form.add_term(var, aij);
    }
    powers[i].push_back(ComplexPolynomial::constant(n, 1.0));
    for (int k = 1; k <= max_deg; ++k) powers[i].push_back(powers[i].back() * form);
  }

  for (const auto& [idx, c] : p.terms()) {
    ComplexPolynomial image = ComplexPolynomial::constant(n, 1.0);
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const int e = idx.exponent(i);
      if (e > 0) image = image * powers[i][static_cast<std::size_t>(e)];
    }
    for (const auto& [t, v] : image.terms()) r.add_term(t, c * v);
  }
  r.canonicalize();
  return r;
}

// Direct sparse evaluation at a point of length 2n.
Complex evaluate(const ComplexPolynomial& p, std::span<const Complex> point);
double evaluate_real(const ComplexPolynomial& p, std::span<const double> point);

// (dh/dy, -dh/dx) at a real point; real parts of the derivatives.
std::vector<double> hamiltonian_vector_field(const ComplexPolynomial& h, std::span<const double> point);

// Max coefficient modulus.
double max_norm(const ComplexPolynomial& p);
// Euclidean norm of the coefficient vector.
double coefficient_norm(const ComplexPolynomial& p);
// Max over the union of supports of |p_k - q_k|.
double max_difference(const ComplexPolynomial& p, const ComplexPolynomial& q);

ComplexPolynomial conj(const ComplexPolynomial& p);
ComplexPolynomial real_part(const ComplexPolynomial& p);

std::string to_string(const ComplexPolynomial& p, bool complex_vars = false);

}  // namespace avint
