#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace parea {

/// Arithmetic expression over named variables: + - * / ^, unary minus,
/// sin cos tan sqrt abs exp log, constants pi and e.
class Expression {
 public:
  /// Throws ArgumentError with the offending position on syntax errors or
  /// identifiers outside `variables`.
  static Expression parse(const std::string& text, std::vector<std::string> variables);

  /// values[k] binds variables[k].
  double operator()(std::span<const double> values) const;
  double operator()(std::initializer_list<double> values) const {
    return (*this)(std::span<const double>(values.begin(), values.size()));
  }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }

  struct Node;

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const Node> root_;
};

/// Parses a constant expression such as "pi/3".
double parse_constant(const std::string& text);

}  // namespace parea
