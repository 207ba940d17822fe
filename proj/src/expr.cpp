#include "tmgeom/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace tmgeom {

namespace {

using Node = ExprNode;
using NodePtr = std::shared_ptr<const Node>;

struct FuncName {
  std::string_view name;
  Func func;
};

constexpr std::array<FuncName, 9> kFuncs{{{"sin", Func::Sin},
                                          {"cos", Func::Cos},
                                          {"tan", Func::Tan},
                                          {"exp", Func::Exp},
                                          {"log", Func::Log},
                                          {"sqrt", Func::Sqrt},
                                          {"sinh", Func::Sinh},
                                          {"cosh", Func::Cosh},
                                          {"tanh", Func::Tanh}}};

std::string_view func_name(Func f) {
  for (const auto& entry : kFuncs) {
    if (entry.func == f) return entry.name;
  }
  return "?";
}

NodePtr leaf_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->constant = v;
  return n;
}

NodePtr binary(Node::Kind kind, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, int n) : src_(src), n_(n) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(ParseError::Kind::Syntax, pos_, "empty expression");
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(ParseError::Kind::Syntax, pos_,
                     "syntax error at offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Node::Kind::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = binary(Node::Kind::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Node::Kind::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(Node::Kind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Neg;
      n->lhs = parse_unary();
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    while (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      std::size_t end = pos_;
      if (end < src_.size() && (src_[end] == '-' || src_[end] == '+')) ++end;
      const std::size_t digits = end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      if (end == digits) fail("exponent must be an integer literal");
      if (end < src_.size() && (src_[end] == '.' || src_[end] == 'e' || src_[end] == 'E')) {
        throw ParseError(ParseError::Kind::BadExponent, start,
                         "exponent at offset " + std::to_string(start) + " must be an integer literal");
      }
      int value = 0;
      const char* first = src_.data() + start + (src_[start] == '+' ? 1 : 0);
      const auto res = std::from_chars(first, src_.data() + end, value);
      if (res.ec != std::errc{}) {
        throw ParseError(ParseError::Kind::BadExponent, start, "exponent out of range");
      }
      pos_ = end;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Pow;
      n->lhs = base;
      n->exponent = value;
      base = n;
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) ++end;
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
      if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
        while (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) ++e;
        end = e;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + end, v);
    if (res.ec != std::errc{} || res.ptr != src_.data() + end) fail("malformed number");
    pos_ = end;
    return leaf_constant(v);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && std::isalnum(static_cast<unsigned char>(src_[end]))) ++end;
    const std::string_view id = src_.substr(start, end - start);
    pos_ = end;

    if ((id[0] == 'x' || id[0] == 'u') && id.size() > 1 &&
        std::isdigit(static_cast<unsigned char>(id[1]))) {
      int k = 0;
      const auto res = std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (res.ec != std::errc{} || res.ptr != id.data() + id.size()) {
        throw ParseError(ParseError::Kind::UnknownIdentifier, start,
                         "unknown identifier '" + std::string(id) + "' at offset " + std::to_string(start));
      }
      if (k < 1 || k > n_) {
        throw ParseError(ParseError::Kind::VariableOutOfRange, start,
                         "variable '" + std::string(id) + "' at offset " + std::to_string(start) +
                             " is out of range for dimension " + std::to_string(n_));
      }
      auto n = std::make_shared<Node>();
      n->kind = id[0] == 'x' ? Node::Kind::BaseVar : Node::Kind::FiberVar;
      n->index = k - 1;
      return n;
    }
    if (id == "pi") return leaf_constant(std::numbers::pi);
    for (const auto& entry : kFuncs) {
      if (entry.name == id) {
        if (!accept('(')) fail("expected '(' after function name");
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->func = entry.func;
        n->lhs = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return n;
      }
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, start,
                     "unknown identifier '" + std::string(id) + "' at offset " + std::to_string(start));
  }

  std::string_view src_;
  int n_;
  std::size_t pos_ = 0;
};

// Binding strength used by the printer: higher binds tighter.
int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Add:
    case Node::Kind::Sub: return 1;
    case Node::Kind::Mul:
    case Node::Kind::Div: return 2;
    case Node::Kind::Neg: return 3;
    case Node::Kind::Pow: return 4;
    case Node::Kind::Constant: return n.constant < 0.0 ? 3 : 5;
    default: return 5;
  }
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    print_node(child, out);
    out += ')';
  } else {
    print_node(child, out);
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Constant: out += format_double(n.constant); return;
    case Node::Kind::BaseVar: out += 'x' + std::to_string(n.index + 1); return;
    case Node::Kind::FiberVar: out += 'u' + std::to_string(n.index + 1); return;
    case Node::Kind::Add:
    case Node::Kind::Sub:
    case Node::Kind::Mul:
    case Node::Kind::Div: {
      const int p = precedence(n);
      print_child(*n.lhs, p, out);
      switch (n.kind) {
        case Node::Kind::Add: out += " + "; break;
        case Node::Kind::Sub: out += " - "; break;
        case Node::Kind::Mul: out += "*"; break;
        default: out += "/"; break;
      }
      // Left associative: an equal-precedence right operand needs parens.
      print_child(*n.rhs, p + 1, out);
      return;
    }
    case Node::Kind::Neg:
      out += '-';
      print_child(*n.lhs, 3, out);
      return;
    case Node::Kind::Pow:
      print_child(*n.lhs, 5, out);
      out += '^';
      out += std::to_string(n.exponent);
      return;
    case Node::Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

bool nodes_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::Constant: return a.constant == b.constant;
    case Node::Kind::BaseVar:
    case Node::Kind::FiberVar: return a.index == b.index;
    case Node::Kind::Pow: return a.exponent == b.exponent && nodes_equal(*a.lhs, *b.lhs);
    case Node::Kind::Neg: return nodes_equal(*a.lhs, *b.lhs);
    case Node::Kind::Call: return a.func == b.func && nodes_equal(*a.lhs, *b.lhs);
    default: return nodes_equal(*a.lhs, *b.lhs) && nodes_equal(*a.rhs, *b.rhs);
  }
}

bool any_node(const Node& n, Node::Kind kind) {
  if (n.kind == kind) return true;
  if (n.lhs && any_node(*n.lhs, kind)) return true;
  return n.rhs && any_node(*n.rhs, kind);
}

class JetEvaluator {
 public:
  JetEvaluator(int n, std::span<const double> point, int order) : n_(n), point_(point), order_(order) {}

  Jet eval(const Node& node) const {
    const int nv = static_cast<int>(point_.size());
    switch (node.kind) {
      case Node::Kind::Constant: return Jet::constant(nv, order_, node.constant);
      case Node::Kind::BaseVar: return variable(node.index);
      case Node::Kind::FiberVar: return variable(n_ + node.index);
      case Node::Kind::Add: return eval(*node.lhs) + eval(*node.rhs);
      case Node::Kind::Sub: return eval(*node.lhs) - eval(*node.rhs);
      case Node::Kind::Mul: return eval(*node.lhs) * eval(*node.rhs);
      case Node::Kind::Neg: return -eval(*node.lhs);
      case Node::Kind::Div: {
        const Jet den = eval(*node.rhs);
        if (den.value() == 0.0) domain_error("division by zero", node);
        return eval(*node.lhs) / den;
      }
      case Node::Kind::Pow: {
        const Jet base = eval(*node.lhs);
        if (node.exponent < 0 && base.value() == 0.0) domain_error("division by zero", node);
        return pow(base, node.exponent);
      }
      case Node::Kind::Call: {
        const Jet arg = eval(*node.lhs);
        try {
          return call(node.func, arg);
        } catch (const DomainError& e) {
          domain_error(e.what(), node);
        }
      }
    }
    return Jet::constant(nv, order_, 0.0);
  }

 private:
  Jet variable(int idx) const {
    const int nv = static_cast<int>(point_.size());
    if (idx >= nv) {
      throw std::invalid_argument("expression uses a fiber variable but only base coordinates were supplied");
    }
    return Jet::variable(nv, order_, idx, point_[static_cast<std::size_t>(idx)]);
  }

  static Jet call(Func f, const Jet& a) {
    switch (f) {
      case Func::Sin: return sin(a);
      case Func::Cos: return cos(a);
      case Func::Tan: return tan(a);
      case Func::Exp: return exp(a);
      case Func::Log: return log(a);
      case Func::Sqrt: return sqrt(a);
      case Func::Sinh: return sinh(a);
      case Func::Cosh: return cosh(a);
      case Func::Tanh: return tanh(a);
    }
    return a;
  }

  [[noreturn]] void domain_error(const std::string& what, const Node& node) const {
    std::string text;
    print_node(node, text);
    throw DomainError(what + " in '" + text + "'");
  }

  int n_;
  std::span<const double> point_;
  int order_;
};

}  // namespace

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what), kind_(kind), offset_(offset) {}

bool ExprAst::depends_on_fiber() const { return root_ && any_node(*root_, ExprNode::Kind::FiberVar); }

bool ExprAst::is_constant() const {
  return root_ && !any_node(*root_, ExprNode::Kind::FiberVar) && !any_node(*root_, ExprNode::Kind::BaseVar);
}

bool operator==(const ExprAst& a, const ExprAst& b) {
  if (a.root_ == nullptr || b.root_ == nullptr) return a.root_ == b.root_;
  return a.n_ == b.n_ && nodes_equal(*a.root_, *b.root_);
}

ExprAst parse(std::string_view source, int dimension) {
  if (dimension < 1) throw std::invalid_argument("expression dimension must be positive");
  Parser p(source, dimension);
  return ExprAst(p.run(), dimension);
}

std::string print(const ExprAst& e) {
  std::string out;
  if (!e.empty()) print_node(e.root(), out);
  return out;
}

Jet eval_jet(const ExprAst& e, std::span<const double> point, int order) {
  if (e.empty()) throw std::invalid_argument("cannot evaluate an empty expression");
  const auto size = static_cast<int>(point.size());
  if (size != e.dimension() && size != 2 * e.dimension()) {
    throw std::invalid_argument("evaluation point must have n or 2n coordinates");
  }
  return JetEvaluator(e.dimension(), point, order).eval(e.root());
}

double eval(const ExprAst& e, std::span<const double> point) { return eval_jet(e, point, 0).value(); }

ExprAst make_constant(double v, int dimension) { return ExprAst(leaf_constant(v), dimension); }

ExprAst make_binary(ExprNode::Kind kind, const ExprAst& a, const ExprAst& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("expression dimension mismatch");
  auto root = binary(kind, std::make_shared<Node>(a.root()), std::make_shared<Node>(b.root()));
  return ExprAst(root, a.dimension());
}

ExprAst make_scaled(double s, const ExprAst& a) {
  return make_binary(ExprNode::Kind::Mul, make_constant(s, a.dimension()), a);
}

}  // namespace tmgeom
