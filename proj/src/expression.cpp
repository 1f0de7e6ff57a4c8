#include "fracorder/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace fracorder {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  Expression run() {
    Expression e;
    e.text_ = s_;
    code_ = &e.code_;
    expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    // stack depth and variable usage
    int depth = 0;
    for (const auto& in : e.code_) {
      switch (in.op) {
        case Expression::Op::push:
        case Expression::Op::x1: ++depth; break;
        case Expression::Op::x2: ++depth, e.uses_x2_ = true; break;
        case Expression::Op::t: ++depth, e.uses_t_ = true; break;
        case Expression::Op::add:
        case Expression::Op::sub:
        case Expression::Op::mul:
        case Expression::Op::div:
        case Expression::Op::pow: --depth; break;
        case Expression::Op::chi: depth -= 2; break;
        default: break;
      }
      e.max_depth_ = std::max(e.max_depth_, depth);
    }
    return e;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression '" + s_ + "': " + msg + " at column " + std::to_string(pos_ + 1));
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
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  void emit(Op op, double v = 0.0) { code_->push_back({op, v}); }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) term(), emit(Op::add);
      else if (accept('-')) term(), emit(Op::sub);
      else return;
    }
  }
  void term() {
    unary();
    for (;;) {
      if (accept('*')) unary(), emit(Op::mul);
      else if (accept('/')) unary(), emit(Op::div);
      else return;
    }
  }
  void unary() {
    if (accept('-')) {
      unary();
      emit(Op::neg);
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }
  void power() {
    primary();
    if (accept('^')) {
      unary();  // right associative, allows 2^-x
      emit(Op::pow);
    }
  }
  void primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (accept('(')) {
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      emit(Op::push, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t b = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(b, pos_ - b);
      if (id == "x" || id == "x1") return emit(Op::x1);
      if (id == "x2") return emit(Op::x2);
      if (id == "t") return emit(Op::t);
      if (id == "pi") {
        if (accept('(')) expect(')');
        return emit(Op::push, std::numbers::pi);
      }
      Op op;
      int arity = 1;
      if (id == "sin") op = Op::sin;
      else if (id == "cos") op = Op::cos;
      else if (id == "exp") op = Op::exp;
      else if (id == "sqrt") op = Op::sqrt;
      else if (id == "chi") op = Op::chi, arity = 3;
      else {
        pos_ = b;
        fail("unknown identifier '" + id + "'");
      }
      expect('(');
      expr();
      for (int k = 1; k < arity; ++k) {
        expect(',');
        expr();
      }
      expect(')');
      return emit(op);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::vector<Expression::Instr>* code_ = nullptr;
};

Expression Expression::parse(const std::string& text) { return ExprParser(text).run(); }

bool Expression::is_zero_literal() const { return code_.size() == 1 && code_[0].op == Op::push && code_[0].value == 0.0; }

double Expression::operator()(const Point& x, double t) const {
  if (code_.empty()) throw ExpressionError("empty expression");
  double stack_buf[64];
  std::vector<double> heap;
  double* st = stack_buf;
  if (max_depth_ > 64) {
    heap.resize(max_depth_);
    st = heap.data();
  }
  int sp = 0;
  auto err = [this](const char* what) { throw ExpressionError("expression '" + text_ + "': " + what); };
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::push: st[sp++] = in.value; break;
      case Op::x1: st[sp++] = x[0]; break;
      case Op::x2: st[sp++] = x[1]; break;
      case Op::t: st[sp++] = t; break;
      case Op::add: --sp, st[sp - 1] += st[sp]; break;
      case Op::sub: --sp, st[sp - 1] -= st[sp]; break;
      case Op::mul: --sp, st[sp - 1] *= st[sp]; break;
      case Op::div:
        --sp;
        if (st[sp] == 0.0) err("division by zero");
        st[sp - 1] /= st[sp];
        break;
      case Op::pow:
        --sp;
        st[sp - 1] = std::pow(st[sp - 1], st[sp]);
        if (std::isnan(st[sp - 1])) err("domain error in ^");
        break;
      case Op::neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::sin: st[sp - 1] = std::sin(st[sp - 1]); break;
      case Op::cos: st[sp - 1] = std::cos(st[sp - 1]); break;
      case Op::exp: st[sp - 1] = std::exp(st[sp - 1]); break;
      case Op::sqrt:
        if (st[sp - 1] < 0.0) err("sqrt of a negative number");
        st[sp - 1] = std::sqrt(st[sp - 1]);
        break;
      case Op::chi: {
        sp -= 2;
        const double s = st[sp - 1], lo = st[sp], hi = st[sp + 1];
        st[sp - 1] = (lo <= s && s < hi) ? 1.0 : 0.0;
        break;
      }
    }
  }
  const double v = st[0];
  if (!std::isfinite(v)) err("non-finite result");
  return v;
}

double eval_expression(const std::string& expr, const Point& x, double t) { return Expression::parse(expr)(x, t); }

}  // namespace fracorder
