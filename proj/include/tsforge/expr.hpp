#pragma once

// A small expression language over u, v and the imaginary unit i, used to
// prescribe custom Gauss maps.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'u' | 'v' | 'i' | 'pi' | func '(' expr ')' | '(' expr ')'
//
// Functions: sin cos tan atan sinh cosh tanh exp ln.

#include <cctype>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsforge {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at position " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class Expression {
 public:
  using value_type = std::complex<double>;

  static Expression parse(std::string_view text) {
    Parser p{text, 0};
    Expression e;
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) throw ParseError("unexpected '" + std::string(1, text[p.pos]) + "'", p.pos);
    e.text_ = std::string(text);
    return e;
  }

  value_type operator()(double u, double v) const { return root_->eval(u, v); }
  const std::string& text() const { return text_; }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual value_type eval(double u, double v) const = 0;
  };
  using Ptr = std::shared_ptr<const Node>;

  struct Constant final : Node {
    value_type c;
    explicit Constant(value_type x) : c(x) {}
    value_type eval(double, double) const override { return c; }
  };
  struct VarU final : Node {
    value_type eval(double u, double) const override { return u; }
  };
  struct VarV final : Node {
    value_type eval(double, double v) const override { return v; }
  };
  struct Unary final : Node {
    enum Op { neg, sin, cos, tan, atan, sinh, cosh, tanh, exp, ln } op;
    Ptr a;
    Unary(Op o, Ptr x) : op(o), a(std::move(x)) {}
    value_type eval(double u, double v) const override {
      const value_type x = a->eval(u, v);
      switch (op) {
        case neg: return -x;
        case sin: return std::sin(x);
        case cos: return std::cos(x);
        case tan: return std::tan(x);
        case atan: return std::atan(x);
        case sinh: return std::sinh(x);
        case cosh: return std::cosh(x);
        case tanh: return std::tanh(x);
        case exp: return std::exp(x);
        case ln: return std::log(x);
      }
      return x;
    }
  };
  struct Binary final : Node {
    char op;
    Ptr a, b;
    Binary(char o, Ptr x, Ptr y) : op(o), a(std::move(x)), b(std::move(y)) {}
    value_type eval(double u, double v) const override {
      const value_type x = a->eval(u, v), y = b->eval(u, v);
      switch (op) {
        case '+': return x + y;
        case '-': return x - y;
        case '*': return x * y;
        case '/': return x / y;
        default: break;
      }
      // Integer exponents stay exact polynomial arithmetic.
      if (y.imag() == 0.0 && y.real() == std::round(y.real()) && std::abs(y.real()) <= 64) {
        const int n = static_cast<int>(y.real());
        value_type r = 1.0;
        for (int k = 0; k < std::abs(n); ++k) r *= x;
        return n < 0 ? 1.0 / r : r;
      }
      return std::pow(x, y);
    }
  };

  struct Parser {
    std::string_view s;
    std::size_t pos;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    Ptr expr() {
      Ptr lhs = term();
      for (;;) {
        if (eat('+')) lhs = std::make_shared<Binary>('+', lhs, term());
        else if (eat('-')) lhs = std::make_shared<Binary>('-', lhs, term());
        else return lhs;
      }
    }
    Ptr term() {
      Ptr lhs = unary();
      for (;;) {
        if (eat('*')) lhs = std::make_shared<Binary>('*', lhs, unary());
        else if (eat('/')) lhs = std::make_shared<Binary>('/', lhs, unary());
        else return lhs;
      }
    }
    Ptr unary() {
      if (eat('-')) return std::make_shared<Unary>(Unary::neg, unary());
      if (eat('+')) return unary();
      return power();
    }
    Ptr power() {
      Ptr base = atom();
      if (eat('^')) return std::make_shared<Binary>('^', base, unary());
      return base;
    }
    Ptr atom() {
      skip();
      if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        Ptr e = expr();
        if (!eat(')')) throw ParseError("expected ')'", pos);
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c))) return name();
      throw ParseError("unexpected '" + std::string(1, c) + "'", pos);
    }
    Ptr number() {
      const std::size_t start = pos;
      while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) ++pos;
      if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        std::size_t q = pos + 1;
        if (q < s.size() && (s[q] == '+' || s[q] == '-')) ++q;
        if (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) {
          pos = q;
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
      }
      const std::string tok(s.substr(start, pos - start));
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + tok + "'", start);
      }
      if (used != tok.size()) throw ParseError("malformed number '" + tok + "'", start);
      return std::make_shared<Constant>(value_type{x, 0.0});
    }
    Ptr name() {
      const std::size_t start = pos;
      while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
      const std::string_view id = s.substr(start, pos - start);
      if (id == "u") return std::make_shared<VarU>();
      if (id == "v") return std::make_shared<VarV>();
      if (id == "i") return std::make_shared<Constant>(value_type{0.0, 1.0});
      if (id == "pi") return std::make_shared<Constant>(value_type{3.14159265358979323846, 0.0});
      static constexpr std::pair<std::string_view, Unary::Op> funcs[] = {
          {"sin", Unary::sin},   {"cos", Unary::cos},   {"tan", Unary::tan},
          {"atan", Unary::atan}, {"sinh", Unary::sinh}, {"cosh", Unary::cosh},
          {"tanh", Unary::tanh}, {"exp", Unary::exp},   {"ln", Unary::ln}};
      for (const auto& [fname, op] : funcs)
        if (id == fname) {
          if (!eat('(')) throw ParseError("expected '(' after " + std::string(id), pos);
          Ptr arg = expr();
          if (!eat(')')) throw ParseError("expected ')'", pos);
          return std::make_shared<Unary>(op, arg);
        }
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
  };

  Ptr root_;
  std::string text_;
};

}  // namespace tsforge
