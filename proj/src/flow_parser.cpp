#include <cctype>
#include <sstream>

#include "curveflow/errors.hpp"
#include "curveflow/flowc.hpp"

namespace curveflow {

namespace {

using NodePtr = std::shared_ptr<const FlowNode>;

NodePtr make_node(FlowNode::Kind kind, std::vector<NodePtr> children = {}) {
  auto n = std::make_shared<FlowNode>();
  n->kind = kind;
  n->children = std::move(children);
  return n;
}

// Recursive descent over
//   flow   := "F" "=" expr
//   expr   := term (("+"|"-") term)*
//   term   := factor ("*" factor)*
//   factor := primary ("^" INT)? | "-" factor
//   primary:= "k" | "ds" "(" "k" "," INT ")" | RATIONAL | "(" expr ")"
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    skip_space();
    std::size_t save = pos_;
    if (peek_word() == "F") {
      pos_ += 1;
      skip_space();
      if (peek() == '=') {
        ++pos_;
      } else {
        pos_ = save;
      }
    }
    NodePtr root = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  std::string_view peek_word() {
    skip_space();
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
    if (end == pos_ || std::isdigit(static_cast<unsigned char>(text_[pos_]))) return {};
    return text_.substr(pos_, end - pos_);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string digits() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    return std::string(text_.substr(start, pos_ - start));
  }

  unsigned integer() {
    std::string d = digits();
    if (d.size() > 6) fail("integer too large");
    return static_cast<unsigned>(std::stoul(d));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      char c = peek();
      if (c == '+' || c == '-') {
        ++pos_;
        NodePtr rhs = term();
        lhs = make_node(c == '+' ? FlowNode::Kind::Sum : FlowNode::Kind::Difference, {lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (peek() == '*') {
      ++pos_;
      NodePtr rhs = factor();
      lhs = make_node(FlowNode::Kind::Product, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr factor() {
    if (peek() == '-') {
      ++pos_;
      return make_node(FlowNode::Kind::Negate, {factor()});
    }
    NodePtr base = primary();
    if (peek() == '^') {
      ++pos_;
      auto n = std::make_shared<FlowNode>();
      n->kind = FlowNode::Kind::Power;
      n->order = integer();
      n->children = {base};
      return n;
    }
    return base;
  }

  NodePtr primary() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return rational();
    std::string_view word = peek_word();
    if (word == "k") {
      pos_ += 1;
      return make_node(FlowNode::Kind::Curvature);
    }
    if (word == "ds") {
      pos_ += 2;
      expect('(');
      if (peek_word() != "k") fail("ds() only differentiates k");
      pos_ += 1;
      expect(',');
      std::size_t at = pos_;
      unsigned m = integer();
      if (m == 0) throw ParseError("ds(k,0) is not a derivative; order must be >= 1", at);
      expect(')');
      auto n = std::make_shared<FlowNode>();
      n->kind = FlowNode::Kind::ArcDerivative;
      n->order = m;
      return n;
    }
    if (c == '\0') fail("unexpected end of input");
    fail(word.empty() ? std::string("unexpected character '") + c + "'" : "unknown identifier '" + std::string(word) + "'");
  }

  NodePtr rational() {
    std::string num = digits();
    std::string text = num;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      text += "." + std::string(text_.substr(start, pos_ - start));
    } else if (pos_ < text_.size() && text_[pos_] == '/') {
      ++pos_;
      std::size_t at = pos_;
      std::string den = digits();
      if (den.find_first_not_of('0') == std::string::npos) throw ParseError("zero denominator", at);
      text += "/" + den;
    }
    auto n = std::make_shared<FlowNode>();
    n->kind = FlowNode::Kind::Constant;
    n->value = parse_rational(text);
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int precedence(const FlowNode& n) {
  switch (n.kind) {
    case FlowNode::Kind::Sum:
    case FlowNode::Kind::Difference:
      return 1;
    case FlowNode::Kind::Product:
      return 2;
    case FlowNode::Kind::Negate:
      return 3;
    default:
      return 4;
  }
}

std::string wrap(const FlowNode& child, int min_prec) {
  std::string s = to_source(child);
  return precedence(child) < min_prec ? "(" + s + ")" : s;
}

}  // namespace

FlowExpr parse_flow(std::string_view text) {
  Parser parser(text);
  NodePtr root = parser.parse();
  return FlowExpr{"F = " + to_source(*root), std::string(text), root};
}

std::string to_source(const FlowNode& node) {
  using K = FlowNode::Kind;
  switch (node.kind) {
    case K::Curvature:
      return "k";
    case K::ArcDerivative:
      return "ds(k," + std::to_string(node.order) + ")";
    case K::Constant: {
      std::ostringstream out;
      out << node.value;
      std::string s = out.str();
      return s.front() == '-' ? "(" + s + ")" : s;
    }
    case K::Sum:
      return to_source(*node.children[0]) + " + " + wrap(*node.children[1], 2);
    case K::Difference:
      return to_source(*node.children[0]) + " - " + wrap(*node.children[1], 2);
    case K::Product:
      return wrap(*node.children[0], 2) + " * " + wrap(*node.children[1], 3);
    case K::Negate:
      return "-" + wrap(*node.children[0], 3);
    case K::Power:
      return wrap(*node.children[0], 4) + "^" + std::to_string(node.order);
  }
  return {};
}

}  // namespace curveflow
