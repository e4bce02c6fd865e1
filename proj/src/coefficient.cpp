#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>

#include "specexact/discretize.hpp"
#include "specexact/errors.hpp"

namespace specexact {

namespace {

// Sum of c_k x^{e_k}, keyed by exponent.
using Poly = std::map<double, cplx>;

Poly constant_poly(cplx c) { return Poly{{0.0, c}}; }

Poly add(Poly a, const Poly& b, double sign) {
  for (const auto& [e, c] : b) a[e] += sign * c;
  return a;
}

Poly mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) r[ea + eb] += ca * cb;
  return r;
}

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  Poly run() {
    Poly p = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ArgumentError("coefficient \"" + s_ + "\": " + why + " at offset " +
                        std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  Poly expr() {
    Poly p = term();
    for (;;) {
      if (eat('+'))
        p = add(p, term(), 1.0);
      else if (eat('-'))
        p = add(p, term(), -1.0);
      else
        return p;
    }
  }

  Poly term() {
    Poly p = unary();
    for (;;) {
      if (eat('*')) {
        p = mul(p, unary());
      } else if (eat('/')) {
        Poly d = unary();
        if (d.size() != 1 || d.begin()->second == cplx{}) fail("can only divide by a nonzero monomial");
        p = mul(p, Poly{{-d.begin()->first, 1.0 / d.begin()->second}});
      } else {
        return p;
      }
    }
  }

  Poly unary() {
    if (eat('-')) return mul(constant_poly(-1.0), unary());
    if (eat('+')) return unary();
    return primary();
  }

  double exponent() {
    if (eat('(')) {
      double sign = 1.0;
      if (eat('-')) sign = -1.0;
      const double e = sign * number();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    double sign = 1.0;
    if (eat('-')) sign = -1.0;
    return sign * number();
  }

  Poly primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      Poly p = expr();
      if (!eat(')')) fail("expected ')'");
      return p;
    }
    const char c = s_[pos_];
    if (c == 'x') {
      ++pos_;
      double e = 1.0;
      if (eat('^')) e = exponent();
      return Poly{{e, 1.0}};
    }
    if (s_.compare(pos_, 2, "pi") == 0) {
      pos_ += 2;
      return constant_poly(std::numbers::pi);
    }
    if (c == 'i') {
      ++pos_;
      return constant_poly(cplx(0.0, 1.0));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return constant_poly(number());
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

cplx power(double x, double e) {
  if (e == 0.0) return 1.0;
  if (e == std::round(e) && std::abs(e) <= 64) {
    const int k = static_cast<int>(e);
    double r = 1.0;
    for (int t = 0; t < std::abs(k); ++t) r *= x;
    return k >= 0 ? r : 1.0 / r;
  }
  return std::pow(x, e);
}

}  // namespace

Coefficient::Coefficient() : Coefficient(constant(0.0)) {}

Coefficient::Coefficient(std::string name, std::function<cplx(double)> value,
                         std::function<cplx(double)> derivative)
    : name_(std::move(name)), value_(std::move(value)), derivative_(std::move(derivative)) {}

Coefficient Coefficient::constant(cplx c) {
  std::string name = std::to_string(c.real());
  if (c.imag() != 0.0) name += (c.imag() < 0 ? "-" : "+") + std::to_string(std::abs(c.imag())) + "i";
  return Coefficient(name, [c](double) { return c; }, [](double) { return cplx{}; });
}

Coefficient Coefficient::parse(const std::string& expr) {
  Poly p = ExprParser(expr).run();
  std::erase_if(p, [](const auto& kv) { return kv.second == cplx{}; });
  std::vector<std::pair<double, cplx>> terms(p.begin(), p.end());
  auto value = [terms](double x) {
    cplx s{};
    for (const auto& [e, c] : terms) s += c * power(x, e);
    return s;
  };
  auto deriv = [terms](double x) {
    cplx s{};
    for (const auto& [e, c] : terms)
      if (e != 0.0) s += c * e * power(x, e - 1.0);
    return s;
  };
  return Coefficient(expr, value, deriv);
}

Coefficient Coefficient::table(std::vector<double> xs, std::vector<cplx> values) {
  if (xs.size() != values.size() || xs.size() < 2)
    throw ArgumentError("coefficient table needs at least two (x, value) pairs of equal length");
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (!(xs[k] > xs[k - 1])) throw ArgumentError("coefficient table abscissae must increase");
  auto locate = [xs](double x) -> std::size_t {
    if (!(x >= xs.front() && x <= xs.back()))
      throw CoefficientError("coefficient table evaluated outside its range at x = " +
                                 std::to_string(x),
                             x);
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t k = static_cast<std::size_t>(it - xs.begin());
    return std::clamp<std::size_t>(k, 1, xs.size() - 1) - 1;
  };
  auto value = [xs, values, locate](double x) {
    const std::size_t k = locate(x);
    const double w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    return (1.0 - w) * values[k] + w * values[k + 1];
  };
  auto deriv = [xs, values, locate](double x) {
    const std::size_t k = locate(x);
    return (values[k + 1] - values[k]) / (xs[k + 1] - xs[k]);
  };
  return Coefficient("table", value, deriv);
}

Coefficient Coefficient::conjugated() const {
  auto v = value_;
  auto d = derivative_;
  return Coefficient("conj(" + name_ + ")", [v](double x) { return std::conj(v(x)); },
                     [d](double x) { return std::conj(d(x)); });
}

}  // namespace specexact
