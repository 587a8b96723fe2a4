#include "parea/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "parea/error.hpp"

namespace parea {

struct Expression::Node {
  enum class Op { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
  Op op = Op::Number;
  double number = 0.0;
  int slot = -1;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(std::span<const double> v) const {
    switch (op) {
      case Op::Number: return number;
      case Op::Variable: return v[slot];
      case Op::Neg: return -lhs->eval(v);
      case Op::Add: return lhs->eval(v) + rhs->eval(v);
      case Op::Sub: return lhs->eval(v) - rhs->eval(v);
      case Op::Mul: return lhs->eval(v) * rhs->eval(v);
      case Op::Div: return lhs->eval(v) / rhs->eval(v);
      case Op::Pow: return std::pow(lhs->eval(v), rhs->eval(v));
      case Op::Call: return fn(lhs->eval(v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

// Recursive descent:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | '+' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ArgumentError("expression '" + s_ + "': " + what + " at position " +
                        std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr a = term();
    for (;;) {
      if (accept('+')) a = make(Op::Add, a, term());
      else if (accept('-')) a = make(Op::Sub, a, term());
      else return a;
    }
  }
  NodePtr term() {
    NodePtr a = unary();
    for (;;) {
      if (accept('*')) a = make(Op::Mul, a, unary());
      else if (accept('/')) a = make(Op::Div, a, unary());
      else return a;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr a = atom();
    if (accept('^')) return make(Op::Pow, a, unary());
    return a;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      const std::string id = s_.substr(start, pos_ - start);
      if (accept('(')) {
        double (*fn)(double) = function(id);
        if (!fn) {
          pos_ = start;
          fail("unknown function '" + id + "'");
        }
        NodePtr arg = expr();
        if (!accept(')')) fail("missing ')'");
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Call;
        n->fn = fn;
        n->lhs = arg;
        return n;
      }
      for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (vars_[k] == id) {
          auto n = std::make_shared<Expression::Node>();
          n->op = Op::Variable;
          n->slot = static_cast<int>(k);
          return n;
        }
      }
      auto n = std::make_shared<Expression::Node>();
      if (id == "pi") n->number = std::numbers::pi;
      else if (id == "e") n->number = std::numbers::e;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      return n;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  static double (*function(const std::string& id))(double) {
    if (id == "sin") return [](double x) { return std::sin(x); };
    if (id == "cos") return [](double x) { return std::cos(x); };
    if (id == "tan") return [](double x) { return std::tan(x); };
    if (id == "sqrt") return [](double x) { return std::sqrt(x); };
    if (id == "abs") return [](double x) { return std::abs(x); };
    if (id == "exp") return [](double x) { return std::exp(x); };
    if (id == "log") return [](double x) { return std::log(x); };
    return nullptr;
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, std::vector<std::string> variables) {
  Expression e;
  e.text_ = text;
  e.variables_ = std::move(variables);
  e.root_ = Parser(e.text_, e.variables_).parse();
  return e;
}

double Expression::operator()(std::span<const double> values) const {
  if (values.size() != variables_.size()) {
    throw ArgumentError("expression '" + text_ + "' expects " +
                        std::to_string(variables_.size()) + " values");
  }
  return root_->eval(values);
}

double parse_constant(const std::string& text) {
  return Expression::parse(text, {})(std::span<const double>{});
}

}  // namespace parea
