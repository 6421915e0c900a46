#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "febvp/error.hpp"
#include "febvp/ode.hpp"

namespace febvp {

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message, std::vector<std::string> expected)
      : Error(ErrorCode::ParseError, message, "position " + std::to_string(position)),
        position_(position),
        expected_(std::move(expected)) {}

  /// Byte offset into the input.
  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

class EvaluationError : public Error {
 public:
  EvaluationError(std::string kind, std::size_t position, const std::string& message)
      : Error(ErrorCode::EvaluationError, message, kind + " at position " + std::to_string(position)),
        kind_(std::move(kind)),
        position_(position) {}

  /// One of division_by_zero, log_domain, sqrt_domain, non_finite.
  const std::string& kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string kind_;
  std::size_t position_;
};

/// Parsed arithmetic expression over tau, x1..xn, v1..vn (x, v when n == 1)
/// and named parameters. Stored as a flat node array; immutable after parse.
class Expr {
 public:
  enum class Kind { Number, Variable, Parameter, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Tan, Sinh, Cosh, Exp, Log, Sqrt, Abs };

  struct Node {
    Kind kind = Kind::Number;
    double value = 0.0;
    int slot = 0;  // variable slot, parameter index or Func
    int lhs = -1;
    int rhs = -1;
    std::size_t pos = 0;
  };

  int dim() const noexcept { return dim_; }
  /// Parameter names in slot order (sorted).
  const std::vector<std::string>& parameters() const noexcept { return params_; }

  /// Evaluates with parameter values given in `parameters()` order.
  double eval(double tau, std::span<const double> x, std::span<const double> v,
              std::span<const double> param_values) const;

  /// Canonical text with minimal parentheses; parses back to the same tree.
  std::string to_string() const;

 private:
  friend class Parser;

  double eval_node(int i, double tau, std::span<const double> x, std::span<const double> v,
                   std::span<const double> p) const;
  void print_node(int i, std::string& out) const;

  int dim_ = 1;
  std::vector<std::string> params_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// Grammar, loosest to tightest: + - (left), * / (left), unary -, ^ (right),
/// then numbers, identifiers, calls f(expr) and parentheses.
Expr parse(std::string_view text, int dim, const std::set<std::string>& params = {});

/// Throws UnboundReference when a parameter of `e` is missing from `params`.
double eval_expr(const Expr& e, double tau, std::span<const double> x, std::span<const double> v,
                 const std::map<std::string, double>& params = {});

/// Builds x'' = f(tau, x, v) from one expression per component.
SecondOrderOde ode_from_expressions(const std::vector<std::string>& components,
                                    const std::map<std::string, double>& params,
                                    std::string label = "expr");

}  // namespace febvp
