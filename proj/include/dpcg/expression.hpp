#pragma once

// Small arithmetic expression language used for coefficient functions,
// bound functions and interval endpoints in problem files.
//
// Grammar (whitespace insensitive):
//
//   expression := term (('+' | '-') term)*
//   term       := unary (('*' | '/') unary)*
//   unary      := '-' unary | power
//   power      := primary ('^' unary)?          (right associative)
//   primary    := number | variable | 'pi' | function '(' args ')' | '(' expression ')'
//
// Unary minus binds looser than '^', so "-2^2" is -4.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dpcg/error.hpp"

namespace dpcg::expr {

enum class Variable : std::uint8_t { z1, z2, r1, r2, n1, n2 };
inline constexpr std::size_t variable_count = 6;
inline constexpr std::array<std::string_view, variable_count> variable_names{
    "z1", "z2", "r1", "r2", "n1", "n2"};

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };
enum class Function : std::uint8_t { Abs, Min, Max, Exp, Log, Sin, Cos, Sqrt };

struct FunctionInfo {
  std::string_view name;
  Function fn;
  std::size_t arity;
};
inline constexpr std::array<FunctionInfo, 8> function_table{{
    {"abs", Function::Abs, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"sqrt", Function::Sqrt, 1},
}};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Literal {
  double value;
};
struct VariableRef {
  Variable var;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Function fn;
  std::vector<NodePtr> args;
};

struct Node {
  std::variant<Literal, VariableRef, Negate, Binary, Call> value;
};

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : InvalidInput(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  [[nodiscard]] std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EvaluationError : public std::runtime_error {
 public:
  enum class Kind { UnboundVariable, DivisionByZero, Domain };
  EvaluationError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Values for the free variables of an expression.
class Bindings {
 public:
  Bindings& set(Variable v, double value) {
    values_[static_cast<std::size_t>(v)] = value;
    bound_ |= 1U << static_cast<unsigned>(v);
    return *this;
  }
  [[nodiscard]] bool is_bound(Variable v) const { return (bound_ >> static_cast<unsigned>(v)) & 1U; }
  [[nodiscard]] double get(Variable v) const { return values_[static_cast<std::size_t>(v)]; }

 private:
  std::array<double, variable_count> values_{};
  unsigned bound_ = 0;
};

namespace detail {

inline bool same_tree(const Node& a, const Node& b) {
  if (a.value.index() != b.value.index()) return false;
  return std::visit(
      [&b](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.value);
        if constexpr (std::is_same_v<T, Literal>) {
          return std::bit_cast<std::uint64_t>(lhs.value) == std::bit_cast<std::uint64_t>(rhs.value);
        } else if constexpr (std::is_same_v<T, VariableRef>) {
          return lhs.var == rhs.var;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return same_tree(*lhs.operand, *rhs.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return lhs.op == rhs.op && same_tree(*lhs.lhs, *rhs.lhs) && same_tree(*lhs.rhs, *rhs.rhs);
        } else {
          if (lhs.fn != rhs.fn || lhs.args.size() != rhs.args.size()) return false;
          for (std::size_t i = 0; i < lhs.args.size(); ++i)
            if (!same_tree(*lhs.args[i], *rhs.args[i])) return false;
          return true;
        }
      },
      a.value);
}

inline std::string format_literal(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline void print(const Node& node, std::string& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += format_literal(n.value);
        } else if constexpr (std::is_same_v<T, VariableRef>) {
          out += variable_names[static_cast<std::size_t>(n.var)];
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += "(-";
          print(*n.operand, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Binary>) {
          static constexpr std::array<char, 5> symbols{'+', '-', '*', '/', '^'};
          out += '(';
          print(*n.lhs, out);
          out += ' ';
          out += symbols[static_cast<std::size_t>(n.op)];
          out += ' ';
          print(*n.rhs, out);
          out += ')';
        } else {
          out += function_table[static_cast<std::size_t>(n.fn)].name;
          out += '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i > 0) out += ", ";
            print(*n.args[i], out);
          }
          out += ')';
        }
      },
      node.value);
}

inline unsigned collect_variables(const Node& node) {
  return std::visit(
      [](const auto& n) -> unsigned {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return 0U;
        } else if constexpr (std::is_same_v<T, VariableRef>) {
          return 1U << static_cast<unsigned>(n.var);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return collect_variables(*n.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return collect_variables(*n.lhs) | collect_variables(*n.rhs);
        } else {
          unsigned mask = 0;
          for (const auto& a : n.args) mask |= collect_variables(*a);
          return mask;
        }
      },
      node.value);
}

[[noreturn]] inline void domain_failure(std::string_view what) {
  throw EvaluationError(EvaluationError::Kind::Domain, "domain error in " + std::string(what));
}

inline double eval(const Node& node, const Bindings& b) {
  return std::visit(
      [&b](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, VariableRef>) {
          if (!b.is_bound(n.var))
            throw EvaluationError(EvaluationError::Kind::UnboundVariable,
                                  "unbound variable '" +
                                      std::string(variable_names[static_cast<std::size_t>(n.var)]) + "'");
          return b.get(n.var);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval(*n.operand, b);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double x = eval(*n.lhs, b);
          const double y = eval(*n.rhs, b);
          switch (n.op) {
            case BinaryOp::Add: return x + y;
            case BinaryOp::Sub: return x - y;
            case BinaryOp::Mul: return x * y;
            case BinaryOp::Div:
              if (y == 0.0) throw EvaluationError(EvaluationError::Kind::DivisionByZero, "division by zero");
              return x / y;
            case BinaryOp::Pow: {
              const double r = std::pow(x, y);
              if (std::isnan(r) && !std::isnan(x) && !std::isnan(y)) domain_failure("^");
              return r;
            }
          }
          return 0.0;
        } else {
          const double x = eval(*n.args[0], b);
          switch (n.fn) {
            case Function::Abs: return std::abs(x);
            case Function::Min: return std::min(x, eval(*n.args[1], b));
            case Function::Max: return std::max(x, eval(*n.args[1], b));
            case Function::Exp: return std::exp(x);
            case Function::Log:
              if (!(x > 0.0)) domain_failure("log");
              return std::log(x);
            case Function::Sin: return std::sin(x);
            case Function::Cos: return std::cos(x);
            case Function::Sqrt:
              if (x < 0.0) domain_failure("sqrt");
              return std::sqrt(x);
          }
          return 0.0;
        }
      },
      node.value);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr root = parse_expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return root;
  }

 private:
  static NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

  [[noreturn]] static void fail(const std::string& msg, std::size_t at) { throw ParseError(msg, at); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expression() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make({Binary{BinaryOp::Add, lhs, parse_term()}});
      } else if (accept('-')) {
        lhs = make({Binary{BinaryOp::Sub, lhs, parse_term()}});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make({Binary{BinaryOp::Mul, lhs, parse_unary()}});
      } else if (accept('/')) {
        lhs = make({Binary{BinaryOp::Div, lhs, parse_unary()}});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make({Negate{parse_unary()}});
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make({Binary{BinaryOp::Pow, base, parse_unary()}});
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expression();
      if (!accept(')')) fail("expected ')'", pos_);
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc{} || ptr == first) fail("malformed number", start);
    pos_ += static_cast<std::size_t>(ptr - first);
    return make({Literal{value}});
  }

  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    for (const auto& info : function_table) {
      if (info.name != name) continue;
      if (!accept('(')) fail("expected '(' after function '" + std::string(name) + "'", pos_);
      std::vector<NodePtr> args;
      args.push_back(parse_expression());
      while (accept(',')) args.push_back(parse_expression());
      if (!accept(')')) fail("expected ')'", pos_);
      if (args.size() != info.arity)
        fail("function '" + std::string(name) + "' takes " + std::to_string(info.arity) + " argument(s)", start);
      return make({Call{info.fn, std::move(args)}});
    }
    if (name == "pi") return make({Literal{std::numbers::pi}});
    for (std::size_t i = 0; i < variable_count; ++i)
      if (variable_names[i] == name) return make({VariableRef{static_cast<Variable>(i)}});
    fail("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// An immutable parsed expression; cheap to copy (shared tree).
class Expression {
 public:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  [[nodiscard]] const Node& root() const { return *root_; }
  [[nodiscard]] double evaluate(const Bindings& b) const { return detail::eval(*root_, b); }

  /// Fully parenthesized form; parsing it yields an identical tree.
  [[nodiscard]] std::string to_string() const {
    std::string out;
    detail::print(*root_, out);
    return out;
  }

  /// Bit mask over Variable of the variables that occur in the tree.
  [[nodiscard]] unsigned free_variables() const { return detail::collect_variables(*root_); }

  [[nodiscard]] bool uses(Variable v) const { return (free_variables() >> static_cast<unsigned>(v)) & 1U; }

  friend bool operator==(const Expression& a, const Expression& b) { return detail::same_tree(*a.root_, *b.root_); }

 private:
  NodePtr root_;
};

inline Expression parse(std::string_view text) { return Expression(detail::Parser(text).parse_all()); }

inline double evaluate(const Expression& e, const Bindings& b) { return e.evaluate(b); }

}  // namespace dpcg::expr
