#include "febvp/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <memory>

namespace febvp {
namespace {

struct FuncInfo {
  std::string_view name;
  Expr::Func func;
};

constexpr std::array<FuncInfo, 9> kFunctions{{
    {"sin", Expr::Func::Sin},
    {"cos", Expr::Func::Cos},
    {"tan", Expr::Func::Tan},
    {"sinh", Expr::Func::Sinh},
    {"cosh", Expr::Func::Cosh},
    {"exp", Expr::Func::Exp},
    {"log", Expr::Func::Log},
    {"sqrt", Expr::Func::Sqrt},
    {"abs", Expr::Func::Abs},
}};

constexpr int kMaxDepth = 256;

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  std::string_view text;
  double number = 0.0;
};

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Pow: return 4;
    default: return 5;
  }
}

}  // namespace

class Parser {
 public:
  Parser(std::string_view text, int dim, const std::set<std::string>& params)
      : text_(text), dim_(dim) {
    expr_.dim_ = dim;
    expr_.params_.assign(params.begin(), params.end());
  }

  Expr run() {
    if (dim_ < 1) throw Error(ErrorCode::InvalidArgument, "expression dimension must be >= 1");
    advance();
    if (cur_.kind == Tok::End) fail("empty expression", {"expression"});
    expr_.root_ = parse_sum(0);
    if (cur_.kind != Tok::End) fail("unexpected trailing input", {"operator", "end of input"});
    return std::move(expr_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    throw ParseError(cur_.pos, msg + " at position " + std::to_string(cur_.pos), std::move(expected));
  }

  void advance() {
    while (at_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[at_]))) ++at_;
    cur_ = Token{};
    cur_.pos = at_;
    if (at_ >= text_.size()) return;
    const char c = text_[at_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && at_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[at_ + 1])))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = at_ + 1;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
      cur_.kind = Tok::Ident;
      cur_.text = text_.substr(at_, end - at_);
      at_ = end;
      return;
    }
    switch (c) {
      case '+': cur_.kind = Tok::Plus; break;
      case '-': cur_.kind = Tok::Minus; break;
      case '*': cur_.kind = Tok::Star; break;
      case '/': cur_.kind = Tok::Slash; break;
      case '^': cur_.kind = Tok::Caret; break;
      case '(': cur_.kind = Tok::LParen; break;
      case ')': cur_.kind = Tok::RParen; break;
      case ',': cur_.kind = Tok::Comma; break;
      default:
        fail(std::string("unexpected character '") + c + "'",
             {"number", "identifier", "operator", "'('", "')'"});
    }
    cur_.text = text_.substr(at_, 1);
    ++at_;
  }

  void lex_number() {
    auto digits = [&](std::size_t i) {
      while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
      return i;
    };
    std::size_t end = digits(at_);
    if (end < text_.size() && text_[end] == '.') end = digits(end + 1);
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
      const std::size_t after = digits(e);
      if (after == e) {
        cur_.pos = e;
        fail("malformed exponent", {"digit"});
      }
      end = after;
    }
    cur_.kind = Tok::Number;
    cur_.text = text_.substr(at_, end - at_);
    const auto res = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(),
                                     cur_.number);
    if (res.ec != std::errc{} || !std::isfinite(cur_.number)) fail("number out of range", {"number"});
    at_ = end;
  }

  int add(Expr::Node n) {
    expr_.nodes_.push_back(n);
    return static_cast<int>(expr_.nodes_.size()) - 1;
  }

  void enter(int depth) const {
    if (depth > kMaxDepth) fail("expression nested too deeply", {});
  }

  int parse_sum(int depth) {
    enter(depth);
    int lhs = parse_product(depth + 1);
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const auto kind = cur_.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      const std::size_t pos = cur_.pos;
      advance();
      const int rhs = parse_product(depth + 1);
      lhs = add({kind, 0.0, 0, lhs, rhs, pos});
    }
    return lhs;
  }

  int parse_product(int depth) {
    enter(depth);
    int lhs = parse_unary(depth + 1);
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const auto kind = cur_.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div;
      const std::size_t pos = cur_.pos;
      advance();
      const int rhs = parse_unary(depth + 1);
      lhs = add({kind, 0.0, 0, lhs, rhs, pos});
    }
    return lhs;
  }

  int parse_unary(int depth) {
    enter(depth);
    if (cur_.kind == Tok::Minus) {
      const std::size_t pos = cur_.pos;
      advance();
      const int operand = parse_unary(depth + 1);
      return add({Expr::Kind::Neg, 0.0, 0, operand, -1, pos});
    }
    return parse_power(depth + 1);
  }

  int parse_power(int depth) {
    enter(depth);
    const int base = parse_primary(depth + 1);
    if (cur_.kind != Tok::Caret) return base;
    const std::size_t pos = cur_.pos;
    advance();
    const int exponent = parse_unary(depth + 1);
    return add({Expr::Kind::Pow, 0.0, 0, base, exponent, pos});
  }

  int parse_primary(int depth) {
    enter(depth);
    const Token tok = cur_;
    switch (tok.kind) {
      case Tok::Number:
        advance();
        return add({Expr::Kind::Number, tok.number, 0, -1, -1, tok.pos});
      case Tok::LParen: {
        advance();
        const int inner = parse_sum(depth + 1);
        if (cur_.kind != Tok::RParen) fail("unbalanced parenthesis", {"')'"});
        advance();
        return inner;
      }
      case Tok::Ident:
        advance();
        if (cur_.kind == Tok::LParen) return parse_call(tok, depth);
        return resolve(tok);
      default:
        fail(tok.kind == Tok::End ? "unexpected end of input" : "unexpected token '" +
                                                                     std::string(tok.text) + "'",
             {"number", "identifier", "'('", "'-'"});
    }
  }

  int parse_call(const Token& name, int depth) {
    const FuncInfo* info = nullptr;
    for (const auto& f : kFunctions)
      if (f.name == name.text) info = &f;
    if (info == nullptr) {
      cur_.pos = name.pos;
      fail("unknown function '" + std::string(name.text) + "'", {"function name"});
    }
    advance();  // '('
    if (cur_.kind == Tok::RParen) fail("function '" + std::string(name.text) + "' takes 1 argument, got 0",
                                       {"expression"});
    const int arg = parse_sum(depth + 1);
    if (cur_.kind == Tok::Comma)
      fail("function '" + std::string(name.text) + "' takes 1 argument", {"')'"});
    if (cur_.kind != Tok::RParen) fail("unbalanced parenthesis", {"')'"});
    advance();
    return add({Expr::Kind::Call, 0.0, static_cast<int>(info->func), arg, -1, name.pos});
  }

  int resolve(const Token& tok) {
    const std::string name(tok.text);
    const auto var = [&](int slot) { return add({Expr::Kind::Variable, 0.0, slot, -1, -1, tok.pos}); };
    if (name == "tau") return var(0);
    if (dim_ == 1 && name == "x") return var(1);
    if (dim_ == 1 && name == "v") return var(2);
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'v')) {
      int idx = 0;
      const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc{} && res.ptr == name.data() + name.size() && name[1] != '0' &&
          idx >= 1 && idx <= dim_)
        return var(name[0] == 'x' ? idx : dim_ + idx);
    }
    for (std::size_t i = 0; i < expr_.params_.size(); ++i)
      if (expr_.params_[i] == name)
        return add({Expr::Kind::Parameter, 0.0, static_cast<int>(i), -1, -1, tok.pos});
    for (const auto& f : kFunctions)
      if (f.name == name) {
        cur_.pos = tok.pos;
        fail("function '" + name + "' requires an argument list", {"'('"});
      }
    cur_.pos = tok.pos;
    fail("unknown identifier '" + name + "'", {"variable", "parameter", "function"});
  }

  std::string_view text_;
  int dim_;
  std::size_t at_ = 0;
  Token cur_;
  Expr expr_;
};

Expr parse(std::string_view text, int dim, const std::set<std::string>& params) {
  return Parser(text, dim, params).run();
}

double Expr::eval(double tau, std::span<const double> x, std::span<const double> v,
                  std::span<const double> param_values) const {
  if (x.size() != static_cast<std::size_t>(dim_) || v.size() != static_cast<std::size_t>(dim_))
    throw Error(ErrorCode::InvalidArgument, "state size does not match expression dimension");
  if (param_values.size() != params_.size())
    throw Error(ErrorCode::InvalidArgument, "parameter count mismatch");
  return eval_node(root_, tau, x, v, param_values);
}

double Expr::eval_node(int i, double tau, std::span<const double> x, std::span<const double> v,
                       std::span<const double> p) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  double r = 0.0;
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Variable:
      if (n.slot == 0) return tau;
      if (n.slot <= dim_) return x[static_cast<std::size_t>(n.slot - 1)];
      return v[static_cast<std::size_t>(n.slot - dim_ - 1)];
    case Kind::Parameter: return p[static_cast<std::size_t>(n.slot)];
    case Kind::Neg: return -eval_node(n.lhs, tau, x, v, p);
    case Kind::Add: r = eval_node(n.lhs, tau, x, v, p) + eval_node(n.rhs, tau, x, v, p); break;
    case Kind::Sub: r = eval_node(n.lhs, tau, x, v, p) - eval_node(n.rhs, tau, x, v, p); break;
    case Kind::Mul: r = eval_node(n.lhs, tau, x, v, p) * eval_node(n.rhs, tau, x, v, p); break;
    case Kind::Div: {
      const double num = eval_node(n.lhs, tau, x, v, p);
      const double den = eval_node(n.rhs, tau, x, v, p);
      if (den == 0.0) throw EvaluationError("division_by_zero", n.pos, "division by zero");
      r = num / den;
      break;
    }
    case Kind::Pow:
      r = std::pow(eval_node(n.lhs, tau, x, v, p), eval_node(n.rhs, tau, x, v, p));
      break;
    case Kind::Call: {
      const double a = eval_node(n.lhs, tau, x, v, p);
      switch (static_cast<Func>(n.slot)) {
        case Func::Sin: r = std::sin(a); break;
        case Func::Cos: r = std::cos(a); break;
        case Func::Tan: r = std::tan(a); break;
        case Func::Sinh: r = std::sinh(a); break;
        case Func::Cosh: r = std::cosh(a); break;
        case Func::Exp: r = std::exp(a); break;
        case Func::Log:
          if (!(a > 0.0)) throw EvaluationError("log_domain", n.pos, "log of a non-positive value");
          r = std::log(a);
          break;
        case Func::Sqrt:
          if (a < 0.0) throw EvaluationError("sqrt_domain", n.pos, "sqrt of a negative value");
          r = std::sqrt(a);
          break;
        case Func::Abs: r = std::abs(a); break;
      }
      break;
    }
  }
  if (!std::isfinite(r)) throw EvaluationError("non_finite", n.pos, "non-finite intermediate value");
  return r;
}

void Expr::print_node(int i, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  auto child = [&](int c, bool parens) {
    if (parens) out += '(';
    print_node(c, out);
    if (parens) out += ')';
  };
  auto prec = [&](int c) { return precedence(nodes_[static_cast<std::size_t>(c)].kind); };
  switch (n.kind) {
    case Kind::Number: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, n.value);
      out.append(buf, res.ptr);
      return;
    }
    case Kind::Variable:
      if (n.slot == 0) out += "tau";
      else if (dim_ == 1) out += n.slot == 1 ? "x" : "v";
      else if (n.slot <= dim_) out += "x" + std::to_string(n.slot);
      else out += "v" + std::to_string(n.slot - dim_);
      return;
    case Kind::Parameter: out += params_[static_cast<std::size_t>(n.slot)]; return;
    case Kind::Neg:
      out += '-';
      child(n.lhs, prec(n.lhs) < 3);
      return;
    case Kind::Add:
    case Kind::Sub:
      child(n.lhs, prec(n.lhs) < 1);
      out += n.kind == Kind::Add ? " + " : " - ";
      child(n.rhs, prec(n.rhs) <= 1);
      return;
    case Kind::Mul:
    case Kind::Div:
      child(n.lhs, prec(n.lhs) < 2);
      out += n.kind == Kind::Mul ? "*" : "/";
      child(n.rhs, prec(n.rhs) <= 2);
      return;
    case Kind::Pow:
      child(n.lhs, prec(n.lhs) < 5);
      out += '^';
      child(n.rhs, prec(n.rhs) < 3);
      return;
    case Kind::Call:
      out += kFunctions[static_cast<std::size_t>(n.slot)].name;
      child(n.lhs, true);
      return;
  }
}

std::string Expr::to_string() const {
  std::string out;
  print_node(root_, out);
  return out;
}

double eval_expr(const Expr& e, double tau, std::span<const double> x, std::span<const double> v,
                 const std::map<std::string, double>& params) {
  std::vector<double> values;
  values.reserve(e.parameters().size());
  for (const auto& name : e.parameters()) {
    const auto it = params.find(name);
    if (it == params.end())
      throw Error(ErrorCode::UnboundReference, "parameter '" + name + "' is not bound", name);
    values.push_back(it->second);
  }
  return e.eval(tau, x, v, values);
}

SecondOrderOde ode_from_expressions(const std::vector<std::string>& components,
                                    const std::map<std::string, double>& params,
                                    std::string label) {
  if (components.empty())
    throw Error(ErrorCode::InvalidArgument, "at least one rhs component is required");
  const int dim = static_cast<int>(components.size());
  std::set<std::string> names;
  for (const auto& [name, value] : params) names.insert(name);

  struct Compiled {
    std::vector<Expr> exprs;
    std::vector<double> values;  // same order for all components (sorted names)
  };
  auto compiled = std::make_shared<Compiled>();
  for (const auto& text : components) compiled->exprs.push_back(parse(text, dim, names));
  for (const auto& name : names) compiled->values.push_back(params.at(name));

  SecondOrderOde ode;
  ode.dim = dim;
  ode.label = std::move(label);
  ode.rhs = [compiled](double tau, std::span<const double> x, std::span<const double> v,
                       std::span<double> out) {
    for (std::size_t i = 0; i < compiled->exprs.size(); ++i)
      out[i] = compiled->exprs[i].eval(tau, x, v, compiled->values);
  };
  return ode;
}

}  // namespace febvp
