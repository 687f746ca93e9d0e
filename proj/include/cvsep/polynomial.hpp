#pragma once

// Sparse real polynomials in up to four phase-space variables, with the linear
// maps and Gaussian smoothing operators needed by the polynomial x Gaussian
// Wigner calculus.

#include "cvsep/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cvsep {

inline constexpr int kMaxVars = 4;
/// Default Fock truncation used when building mixtures.
inline constexpr int kDefaultFockCutoff = 30;
/// Total-degree cap: 2 * n_max + 4.
inline constexpr int kDefaultDegreeCap = 2 * kDefaultFockCutoff + 4;

using Exponents = std::array<int, kMaxVars>;

class DegreeCapExceeded : public NumericError {
 public:
  using NumericError::NumericError;
};

namespace detail {

inline std::uint32_t pack(const Exponents& e) {
  return static_cast<std::uint32_t>(e[0]) | (static_cast<std::uint32_t>(e[1]) << 8) |
         (static_cast<std::uint32_t>(e[2]) << 16) | (static_cast<std::uint32_t>(e[3]) << 24);
}

inline Exponents unpack(std::uint32_t k) {
  return {static_cast<int>(k & 0xffu), static_cast<int>((k >> 8) & 0xffu),
          static_cast<int>((k >> 16) & 0xffu), static_cast<int>((k >> 24) & 0xffu)};
}

inline int total(const Exponents& e) { return e[0] + e[1] + e[2] + e[3]; }

/// Binomial coefficients up to n = 255, computed once.
inline const std::vector<std::vector<double>>& binomials() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t(256);
    for (int n = 0; n < 256; ++n) {
      t[n].assign(n + 1, 1.0);
      for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
  }();
  return table;
}

}  // namespace detail

class Polynomial {
 public:
  using Map = std::unordered_map<std::uint32_t, double>;

  explicit Polynomial(int num_vars = 0, int degree_cap = kDefaultDegreeCap)
      : num_vars_(num_vars), degree_cap_(degree_cap) {
    if (num_vars < 0 || num_vars > kMaxVars)
      throw InvalidArgument("polynomial supports at most 4 variables");
    if (degree_cap < 0 || degree_cap > 255) throw InvalidArgument("degree cap must lie in [0, 255]");
  }

  static Polynomial constant(int num_vars, double c, int degree_cap = kDefaultDegreeCap) {
    Polynomial p(num_vars, degree_cap);
    p.add_term({0, 0, 0, 0}, c);
    return p;
  }

  static Polynomial monomial(int num_vars, const Exponents& e, double c = 1.0,
                             int degree_cap = kDefaultDegreeCap) {
    Polynomial p(num_vars, degree_cap);
    p.add_term(e, c);
    return p;
  }

  int num_vars() const { return num_vars_; }
  int degree_cap() const { return degree_cap_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const Map& terms() const { return terms_; }

  int degree() const {
    int d = 0;
    for (const auto& [k, c] : terms_) d = std::max(d, detail::total(detail::unpack(k)));
    return d;
  }

  double coefficient(const Exponents& e) const {
    auto it = terms_.find(detail::pack(e));
    return it == terms_.end() ? 0.0 : it->second;
  }

  void add_term(const Exponents& e, double c) {
    for (int i = 0; i < kMaxVars; ++i) {
      if (e[i] < 0) throw InvalidArgument("negative exponent");
      if (i >= num_vars_ && e[i] != 0) throw InvalidArgument("exponent on a variable out of range");
    }
    if (detail::total(e) > degree_cap_)
      throw DegreeCapExceeded("polynomial degree " + std::to_string(detail::total(e)) +
                              " exceeds cap " + std::to_string(degree_cap_));
    if (c != 0.0) terms_[detail::pack(e)] += c;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [k, c] : terms_) f(detail::unpack(k), c);
  }

  Polynomial& operator+=(const Polynomial& other) {
    require_same_vars(other);
    degree_cap_ = std::max(degree_cap_, other.degree_cap_);
    for (const auto& [k, c] : other.terms_) terms_[k] += c;
    return *this;
  }

  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.require_same_vars(b);
    const int cap = std::max(a.degree_cap_, b.degree_cap_);
    if (a.degree() + b.degree() > cap)
      throw DegreeCapExceeded("product degree " + std::to_string(a.degree() + b.degree()) +
                              " exceeds cap " + std::to_string(cap));
    Polynomial out(a.num_vars_, cap);
    out.terms_.reserve(a.size() * 4);
    // Packed keys add component-wise as long as no byte overflows (cap <= 255).
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) out.terms_[ka + kb] += ca * cb;
    return out;
  }

  double evaluate(std::span<const double> r) const {
    if (static_cast<int>(r.size()) < num_vars_) throw InvalidArgument("too few coordinates");
    const int deg = degree();
    constexpr int kTable = 256;
    if (deg >= kTable) throw DegreeCapExceeded("polynomial degree too large to evaluate");
    std::array<std::array<double, kTable>, kMaxVars> pw;
    for (int i = 0; i < num_vars_; ++i) {
      pw[i][0] = 1.0;
      for (int j = 1; j <= deg; ++j) pw[i][j] = pw[i][j - 1] * r[i];
    }
    double sum = 0.0;
    for (const auto& [k, c] : terms_) {
      const Exponents e = detail::unpack(k);
      double t = c;
      for (int i = 0; i < num_vars_; ++i) t *= pw[i][e[i]];
      sum += t;
    }
    return sum;
  }

  /// P(y) -> P(y') with y'_target = y_target + c * y_source.
  Polynomial shear(int target, int source, double c) const {
    check_var(target);
    check_var(source);
    if (target == source) throw InvalidArgument("shear needs distinct variables");
    if (c == 0.0) return *this;
    const auto& binom = detail::binomials();
    Polynomial out(num_vars_, degree_cap_);
    out.terms_.reserve(terms_.size() * 2);
    for (const auto& [k, coef] : terms_) {
      const Exponents e = detail::unpack(k);
      const int n = e[target];
      Exponents f = e;
      double cpow = 1.0;
      // (y_t + c y_s)^n = sum_j C(n, j) c^j y_s^j y_t^{n-j}
      for (int j = 0; j <= n; ++j) {
        f[target] = n - j;
        f[source] = e[source] + j;
        out.terms_[detail::pack(f)] += coef * binom[n][j] * cpow;
        cpow *= c;
      }
    }
    out.drop_zeros();
    return out;
  }

  /// P(y) -> P(D y) for diagonal D.
  Polynomial scale_variables(std::span<const double> d) const {
    if (static_cast<int>(d.size()) != num_vars_) throw InvalidArgument("scale vector size mismatch");
    Polynomial out(num_vars_, degree_cap_);
    out.terms_.reserve(terms_.size());
    for (const auto& [k, c] : terms_) {
      const Exponents e = detail::unpack(k);
      double t = c;
      for (int i = 0; i < num_vars_; ++i) t *= std::pow(d[i], e[i]);
      if (t != 0.0) out.terms_[k] += t;
    }
    return out;
  }

  /// P(y) -> P(y') with y'_i = y_{perm[i]}.
  Polynomial permute_variables(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != num_vars_) throw InvalidArgument("permutation size mismatch");
    Polynomial out(num_vars_, degree_cap_);
    out.terms_.reserve(terms_.size());
    for (const auto& [k, c] : terms_) {
      const Exponents e = detail::unpack(k);
      Exponents f{0, 0, 0, 0};
      for (int i = 0; i < num_vars_; ++i) f[perm[i]] += e[i];
      out.terms_[detail::pack(f)] += c;
    }
    return out;
  }

  /// Q(r) = P(A r) for a square invertible A, expanding every monomial in powers of
  /// the linear forms (A r)_i.
  Polynomial substitute(const Matrix& a) const {
    if (a.rows() != num_vars_ || a.cols() != num_vars_)
      throw InvalidArgument("substitution matrix has the wrong shape");
    if (is_diagonal(a)) {
      std::vector<double> d(num_vars_);
      for (int i = 0; i < num_vars_; ++i) d[i] = a(i, i);
      return scale_variables(d);
    }
    if (Eigen::FullPivLU<Matrix>(a).rank() < num_vars_) throw InvalidArgument("substitution matrix is singular");
    std::array<int, kMaxVars> top{};
    for (const auto& [k, c] : terms_) {
      const Exponents e = detail::unpack(k);
      for (int i = 0; i < num_vars_; ++i) top[i] = std::max(top[i], e[i]);
    }
    std::array<std::vector<Polynomial>, kMaxVars> pw;
    for (int i = 0; i < num_vars_; ++i) {
      Polynomial form(num_vars_, degree_cap_);
      for (int j = 0; j < num_vars_; ++j) {
        Exponents u{0, 0, 0, 0};
        u[j] = 1;
        form.add_term(u, a(i, j));
      }
      pw[i].push_back(constant(num_vars_, 1.0, degree_cap_));
      for (int k = 1; k <= top[i]; ++k) pw[i].push_back(pw[i].back() * form);
    }
    Polynomial out(num_vars_, degree_cap_);
    for (const auto& [k, c] : terms_) {
      const Exponents e = detail::unpack(k);
      Polynomial t = pw[0][e[0]];
      for (int i = 1; i < num_vars_; ++i)
        if (e[i] > 0) t = t * pw[i][e[i]];
      for (const auto& [kt, ct] : t.terms_) out.terms_[kt] += c * ct;
    }
    out.drop_zeros();
    return out;
  }

  /// exp(1/2 sum_ij C_ij d_i d_j) P, i.e. r -> E[P(r + z)] for z ~ N(0, C).
  Polynomial heat(const Matrix& c) const {
    if (c.rows() != num_vars_ || c.cols() != num_vars_) throw InvalidArgument("heat kernel shape mismatch");
    Polynomial result = *this;
    Polynomial term = *this;
    for (int k = 1; !term.empty(); ++k) {
      Polynomial next(num_vars_, degree_cap_);
      next.terms_.reserve(term.size());
      for (const auto& [key, coef] : term.terms_) {
        const Exponents e = detail::unpack(key);
        for (int i = 0; i < num_vars_; ++i) {
          if (e[i] >= 2 && c(i, i) != 0.0) {
            Exponents f = e;
            f[i] -= 2;
            next.terms_[detail::pack(f)] += 0.5 * c(i, i) * e[i] * (e[i] - 1) * coef;
          }
          for (int j = i + 1; j < num_vars_; ++j) {
            if (e[i] >= 1 && e[j] >= 1 && c(i, j) != 0.0) {
              Exponents f = e;
              f[i] -= 1;
              f[j] -= 1;
              next.terms_[detail::pack(f)] += c(i, j) * e[i] * e[j] * coef;
            }
          }
        }
      }
      next *= 1.0 / k;
      next.drop_zeros();
      result += next;
      term = std::move(next);
    }
    result.drop_zeros();
    return result;
  }

  /// Sets every variable not listed in `keep` to zero and renumbers the kept ones.
  Polynomial restrict_to(std::span<const int> keep) const {
    Polynomial out(static_cast<int>(keep.size()), degree_cap_);
    for (const auto& [k, c] : terms_) {
      const Exponents e = detail::unpack(k);
      Exponents f{0, 0, 0, 0};
      int kept_degree = 0;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        f[i] = e[keep[i]];
        kept_degree += f[i];
      }
      if (kept_degree == detail::total(e)) out.terms_[detail::pack(f)] += c;
    }
    return out;
  }

  /// Re-homes the variables into a larger space starting at `offset`.
  Polynomial embed(int new_num_vars, int offset) const {
    if (offset < 0 || offset + num_vars_ > new_num_vars) throw InvalidArgument("embed out of range");
    Polynomial out(new_num_vars, degree_cap_);
    out.terms_.reserve(terms_.size());
    for (const auto& [k, c] : terms_) {
      const Exponents e = detail::unpack(k);
      Exponents f{0, 0, 0, 0};
      for (int i = 0; i < num_vars_; ++i) f[offset + i] = e[i];
      out.terms_[detail::pack(f)] += c;
    }
    return out;
  }

  void drop_zeros() { std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; }); }

 private:
  void check_var(int i) const {
    if (i < 0 || i >= num_vars_) throw InvalidArgument("variable index out of range");
  }
  void require_same_vars(const Polynomial& other) const {
    if (other.num_vars_ != num_vars_) throw InvalidArgument("polynomials live in different spaces");
  }
  static bool is_diagonal(const Matrix& a) {
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        if (i != j && a(i, j) != 0.0) return false;
    return true;
  }

  int num_vars_;
  int degree_cap_;
  Map terms_;
};

/// Memoised centred Gaussian moments E[r^m] for a fixed covariance, by Isserlis recursion.
class GaussianMoments {
 public:
  explicit GaussianMoments(Matrix sigma) : sigma_(std::move(sigma)) {
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() > kMaxVars)
      throw InvalidArgument("moment covariance must be square with at most 4 rows");
  }

  double operator()(const Exponents& m) {
    if (detail::total(m) % 2 != 0) return 0.0;
    if (detail::total(m) == 0) return 1.0;
    const std::uint32_t key = detail::pack(m);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    int i = 0;
    while (m[i] == 0) ++i;
    Exponents rest = m;
    rest[i] -= 1;
    // E[r_i r^rest] = sum_j Sigma_ij * rest_j * E[r^{rest - e_j}]
    double value = 0.0;
    for (int j = 0; j < sigma_.rows(); ++j) {
      if (rest[j] == 0 || sigma_(i, j) == 0.0) continue;
      Exponents sub = rest;
      sub[j] -= 1;
      value += sigma_(i, j) * rest[j] * (*this)(sub);
    }
    memo_.emplace(key, value);
    return value;
  }

  /// E[P(r)] for r ~ N(0, Sigma).
  double expectation(const Polynomial& p) {
    if (p.num_vars() != sigma_.rows()) throw InvalidArgument("moment dimension mismatch");
    double sum = 0.0;
    p.for_each([&](const Exponents& e, double c) { sum += c * (*this)(e); });
    return sum;
  }

 private:
  Matrix sigma_;
  std::unordered_map<std::uint32_t, double> memo_;
};

}  // namespace cvsep
