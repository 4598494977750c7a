#include "qfilter/expression.hpp"

#include <cctype>
#include <unsupported/Eigen/KroneckerProduct>
#include <variant>

#include "qfilter/errors.hpp"

namespace qfilter {

namespace {

struct Token {
  enum Kind { Number, Imag, Ident, Plus, Minus, Star, LParen, RParen, Prime,
              LBracket, RBracket, End } kind = End;
  double value = 0.0;      // Number
  bool imaginary = false;  // Number with trailing i
  std::string text;        // Ident
  int pos = 0;             // byte offset for diagnostics
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    Token t;
    t.pos = int(pos_);
    if (pos_ >= src_.size()) return t;

    const char c = src_[pos_];
    switch (c) {
      case '+': ++pos_; t.kind = Token::Plus; return t;
      case '-': ++pos_; t.kind = Token::Minus; return t;
      case '*': ++pos_; t.kind = Token::Star; return t;
      case '(': ++pos_; t.kind = Token::LParen; return t;
      case ')': ++pos_; t.kind = Token::RParen; return t;
      case '\'': ++pos_; t.kind = Token::Prime; return t;
      case '[': ++pos_; t.kind = Token::LBracket; return t;
      case ']': ++pos_; t.kind = Token::RBracket; return t;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      t.text = src_.substr(start, pos_ - start);
      if (t.text == "i") {
        t.kind = Token::Imag;
      } else {
        t.kind = Token::Ident;
      }
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", 1, int(pos_) + 1);
  }

 private:
  Token lex_number() {
    Token t;
    t.pos = int(pos_);
    size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to an identifier-like tail; reject below
      }
    }
    const std::string digits = src_.substr(start, pos_ - start);
    if (digits == "." || digits.empty())
      throw ParseError("malformed number", 1, int(start) + 1);
    t.kind = Token::Number;
    t.value = std::stod(digits);
    if (pos_ < src_.size() && src_[pos_] == 'i') {
      ++pos_;
      t.imaginary = true;
    }
    return t;
  }

  const std::string& src_;
  size_t pos_ = 0;
};

// A value is either a complex scalar or an operator on the full space.
using Value = std::variant<Complex, Operator>;

class Parser {
 public:
  Parser(const std::string& src, const std::vector<int>& dims)
      : lexer_(src), dims_(dims) {
    full_dim_ = 1;
    for (int d : dims_) full_dim_ *= d;
    advance();
  }

  Operator run() {
    Value v = parse_expr();
    if (cur_.kind != Token::End)
      throw ParseError("unexpected trailing input", 1, cur_.pos + 1);
    return to_operator(v);
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, 1, cur_.pos + 1);
  }

  Operator to_operator(const Value& v) const {
    if (std::holds_alternative<Operator>(v)) return std::get<Operator>(v);
    return std::get<Complex>(v) * Operator::Identity(full_dim_, full_dim_);
  }

  Value parse_expr() {
    Value v = parse_term();
    while (cur_.kind == Token::Plus || cur_.kind == Token::Minus) {
      const double sign = cur_.kind == Token::Plus ? 1.0 : -1.0;
      advance();
      Value rhs = parse_term();
      v = combine_add(v, rhs, sign);
    }
    return v;
  }

  Value combine_add(const Value& a, const Value& b, double sign) const {
    if (std::holds_alternative<Complex>(a) && std::holds_alternative<Complex>(b))
      return std::get<Complex>(a) + sign * std::get<Complex>(b);
    return Value{Operator(to_operator(a) + sign * to_operator(b))};
  }

  Value parse_term() {
    Value v = parse_unary();
    while (cur_.kind == Token::Star) {
      advance();
      Value rhs = parse_unary();
      v = combine_mul(v, rhs);
    }
    return v;
  }

  Value combine_mul(const Value& a, const Value& b) const {
    if (std::holds_alternative<Complex>(a) && std::holds_alternative<Complex>(b))
      return std::get<Complex>(a) * std::get<Complex>(b);
    if (std::holds_alternative<Complex>(a))
      return Value{Operator(std::get<Complex>(a) * std::get<Operator>(b))};
    if (std::holds_alternative<Complex>(b))
      return Value{Operator(std::get<Operator>(a) * std::get<Complex>(b))};
    return Value{Operator(std::get<Operator>(a) * std::get<Operator>(b))};
  }

  Value parse_unary() {
    double sign = 1.0;
    while (cur_.kind == Token::Plus || cur_.kind == Token::Minus) {
      if (cur_.kind == Token::Minus) sign = -sign;
      advance();
    }
    Value v = parse_postfix();
    if (sign < 0) {
      if (std::holds_alternative<Complex>(v)) return -std::get<Complex>(v);
      return Value{Operator(-std::get<Operator>(v))};
    }
    return v;
  }

  Value parse_postfix() {
    Value v = parse_primary();
    while (cur_.kind == Token::Prime) {
      advance();
      if (std::holds_alternative<Complex>(v))
        v = std::conj(std::get<Complex>(v));
      else
        v = Value{Operator(std::get<Operator>(v).adjoint())};
    }
    return v;
  }

  Value parse_primary() {
    switch (cur_.kind) {
      case Token::Number: {
        Complex c = cur_.imaginary ? Complex(0.0, cur_.value) : Complex(cur_.value, 0.0);
        advance();
        return c;
      }
      case Token::Imag:
        advance();
        return Complex(0.0, 1.0);
      case Token::LParen: {
        advance();
        Value v = parse_expr();
        if (cur_.kind != Token::RParen) fail("expected ')'");
        advance();
        return v;
      }
      case Token::Ident:
        return parse_primitive();
      default:
        fail("expected a number, primitive or '('");
    }
  }

  Value parse_primitive() {
    const std::string name = cur_.text;
    const int name_pos = cur_.pos;
    advance();

    int sub = -1;
    if (cur_.kind == Token::LBracket) {
      advance();
      if (cur_.kind != Token::Number || cur_.imaginary ||
          cur_.value != double(long(cur_.value)))
        fail("expected an integer subsystem index");
      sub = int(cur_.value);
      advance();
      if (cur_.kind != Token::RBracket) fail("expected ']'");
      advance();
    }

    if (sub < 0) {
      if (dims_.size() != 1)
        throw ParseError("primitive '" + name + "' needs a subsystem index with " +
                             std::to_string(dims_.size()) + " subsystems",
                         1, name_pos + 1);
      sub = 0;
    }
    if (sub >= int(dims_.size()))
      throw ParseError("subsystem index " + std::to_string(sub) + " out of range (" +
                           std::to_string(dims_.size()) + " subsystems)",
                       1, name_pos + 1);

    const int d = dims_[sub];
    Operator prim;
    if (name == "identity") {
      prim = identity_op(d);
    } else if (name == "annihilator") {
      prim = annihilation_op(d);
    } else if (name == "creator") {
      prim = annihilation_op(d).adjoint();
    } else if (name == "number") {
      prim = number_op(d);
    } else if (name.rfind("sigma_", 0) == 0) {
      if (d != 2)
        throw ParseError("'" + name + "' requires a two-level subsystem (dim " +
                             std::to_string(d) + " given)",
                         1, name_pos + 1);
      const std::string which = name.substr(6);
      if (which != "x" && which != "y" && which != "z" && which != "plus" && which != "minus")
        throw ParseError("unknown primitive '" + name + "'", 1, name_pos + 1);
      prim = pauli(which);
    } else {
      throw ParseError("unknown primitive '" + name + "'", 1, name_pos + 1);
    }
    return Value{embed(prim, sub)};
  }

  // I x ... x prim x ... x I over the declared subsystem layout.
  Operator embed(const Operator& prim, int sub) const {
    Operator out = Operator::Identity(1, 1);
    for (int k = 0; k < int(dims_.size()); ++k) {
      const Operator& factor = (k == sub) ? prim : Operator(identity_op(dims_[k]));
      out = Eigen::kroneckerProduct(out, factor).eval();
    }
    return out;
  }

  Lexer lexer_;
  std::vector<int> dims_;
  Eigen::Index full_dim_ = 1;
  Token cur_;
};

}  // namespace

Operator parse_operator_expr(const std::string& text, const std::vector<int>& dims) {
  if (dims.empty()) throw ParseError("no subsystem dimensions given");
  for (int d : dims)
    if (d < 1) throw ParseError("subsystem dimensions must be positive");
  return Parser(text, dims).run();
}

}  // namespace qfilter
