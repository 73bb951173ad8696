#include "polydro/poly_text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "polydro/errors.hpp"

namespace polydro {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const VariableScope& scope) : text_(text), scope_(scope) {
    if (scope.n + scope.p == 0) throw Error(ErrorKind::Dimension, "no variables declared");
  }

  Polynomial parse() {
    Polynomial p = expr();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  std::size_t vars() const { return scope_.n + scope_.p; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, 1, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char ch) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial acc = term();
    for (;;) {
      if (accept('+')) acc += term();
      else if (accept('-')) acc -= term();
      else return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    while (accept('*')) acc = acc * unary();
    return acc;
  }

  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer");
      unsigned k = 0;
      auto res = std::from_chars(text_.data() + start, text_.data() + pos_, k);
      if (res.ec != std::errc() || k > 64) fail("exponent out of range");
      if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
        fail("exponent must be a non-negative integer");
      base = base.pow(k);
    }
    return base;
  }

  Polynomial primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char ch = text_[pos_];
    if (ch == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (ch == 'x') return variable();
    fail("unexpected character '" + std::string(1, ch) + "'");
  }

  Polynomial number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return Polynomial::constant(vars(), v);
  }

  Polynomial variable() {
    const std::size_t start = pos_;
    ++pos_;  // 'x'
    bool is_xi = false;
    if (pos_ < text_.size() && text_[pos_] == 'i') {
      is_xi = true;
      ++pos_;
    }
    const std::size_t digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (digits == pos_) {
      pos_ = start;
      fail("variable needs an index, e.g. x1 or xi1");
    }
    std::size_t idx = 0;
    std::from_chars(text_.data() + digits, text_.data() + pos_, idx);
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      pos_ = start;
      fail("unknown identifier");
    }
    const std::size_t limit = is_xi ? scope_.p : scope_.n;
    const bool allowed = is_xi ? scope_.allow_xi : scope_.allow_x;
    if (!allowed || idx == 0 || idx > limit) {
      pos_ = start;
      fail(std::string("variable ") + (is_xi ? "xi" : "x") + std::to_string(idx) + " is not declared here");
    }
    const std::size_t var = is_xi ? scope_.n + idx - 1 : idx - 1;
    return Polynomial::variable(vars(), var);
  }

  std::string_view text_;
  VariableScope scope_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, const VariableScope& scope) { return Parser(text, scope).parse(); }

Polynomial parse_x_polynomial(std::string_view text, std::size_t n) {
  return Parser(text, VariableScope{n, 0, true, false}).parse();
}

Polynomial parse_xi_polynomial(std::string_view text, std::size_t p) {
  return Parser(text, VariableScope{0, p, false, true}).parse();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_polynomial(const Polynomial& poly, std::size_t n) {
  if (poly.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [e, c] : poly.terms()) {
    const bool constant = total_degree(e) == 0;
    double mag = c;
    if (first) {
      if (c < 0) {
        out += "-";
        mag = -c;
      }
    } else {
      out += c < 0 ? " - " : " + ";
      mag = std::abs(c);
    }
    first = false;
    bool need_star = false;
    if (constant || mag != 1.0) {
      out += format_double(mag);
      need_star = true;
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (need_star) out += "*";
      out += i < n ? "x" + std::to_string(i + 1) : "xi" + std::to_string(i - n + 1);
      if (e[i] > 1) out += "^" + std::to_string(e[i]);
      need_star = true;
    }
  }
  return out;
}

std::string format_x_polynomial(const Polynomial& poly) { return format_polynomial(poly, poly.var_count()); }
std::string format_xi_polynomial(const Polynomial& poly) { return format_polynomial(poly, 0); }

}  // namespace polydro
