#include "stlncs/stl.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

namespace stlncs {

// ---------------------------------------------------------------------------
// AST construction

InnerFormula InnerFormula::make_pred(Predicate p) {
  InnerFormula f;
  f.kind = Kind::Pred;
  f.pred = std::move(p);
  return f;
}

InnerFormula InnerFormula::make_not(InnerFormula child) {
  InnerFormula f;
  f.kind = Kind::Not;
  f.children.push_back(std::move(child));
  return f;
}

static InnerFormula make_nary(InnerFormula::Kind kind, std::vector<InnerFormula> fs) {
  assert(!fs.empty());
  if (fs.size() == 1) return std::move(fs.front());
  InnerFormula f;
  f.kind = kind;
  for (auto& child : fs) {
    if (child.kind == kind) {
      // flatten same-kind children so association does not matter
      for (auto& grand : child.children) f.children.push_back(std::move(grand));
    } else {
      f.children.push_back(std::move(child));
    }
  }
  return f;
}

InnerFormula InnerFormula::make_and(std::vector<InnerFormula> fs) { return make_nary(Kind::And, std::move(fs)); }
InnerFormula InnerFormula::make_or(std::vector<InnerFormula> fs) { return make_nary(Kind::Or, std::move(fs)); }

Phi phi_leaf(SubFormula sub) {
  Phi phi;
  phi.root.kind = PhiNode::Kind::Leaf;
  phi.root.leaf = 0;
  phi.subs.push_back(std::move(sub));
  return phi;
}

static Phi phi_nary(PhiNode::Kind kind, std::vector<Phi> parts) {
  assert(!parts.empty());
  if (parts.size() == 1) return std::move(parts.front());
  Phi out;
  out.root.kind = kind;
  for (auto& part : parts) {
    const int base = static_cast<int>(out.subs.size());
    auto reindex = [base](PhiNode& node, auto&& self) -> void {
      if (node.kind == PhiNode::Kind::Leaf) {
        node.leaf += base;
      } else {
        for (auto& c : node.children) self(c, self);
      }
    };
    reindex(part.root, reindex);
    if (part.root.kind == kind) {
      for (auto& c : part.root.children) out.root.children.push_back(std::move(c));
    } else {
      out.root.children.push_back(std::move(part.root));
    }
    for (auto& s : part.subs) out.subs.push_back(std::move(s));
  }
  return out;
}

Phi phi_and(std::vector<Phi> parts) { return phi_nary(PhiNode::Kind::And, std::move(parts)); }
Phi phi_or(std::vector<Phi> parts) { return phi_nary(PhiNode::Kind::Or, std::move(parts)); }

Spec make_spec(TemporalOp outer, int horizon_end, Phi phi) {
  Spec spec;
  spec.outer_op = outer;
  spec.horizon_end = horizon_end;
  spec.tau = horizon(phi) + 1;
  spec.total_horizon = horizon_end + spec.tau - 1;
  spec.phi = std::move(phi);
  return spec;
}

// ---------------------------------------------------------------------------
// Trace

Trace Trace::from_states(const std::vector<std::vector<double>>& states) {
  if (states.empty()) throw std::invalid_argument("trace must contain at least one state");
  Trace trace(static_cast<int>(states.front().size()), static_cast<int>(states.size()));
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (static_cast<int>(states[t].size()) != trace.n_x_)
      throw std::invalid_argument("trace states must share one dimension");
    trace.set_state(static_cast<int>(t), states[t]);
  }
  return trace;
}

void Trace::set_state(int t, std::span<const double> x) {
  assert(t >= 0 && t < length_ && static_cast<int>(x.size()) == n_x_);
  std::copy(x.begin(), x.end(), data_.begin() + static_cast<std::size_t>(t) * n_x_);
}

void Trace::push_back(std::span<const double> x) {
  if (n_x_ == 0) n_x_ = static_cast<int>(x.size());
  assert(static_cast<int>(x.size()) == n_x_);
  data_.insert(data_.end(), x.begin(), x.end());
  ++length_;
}

void Trace::shift_append(std::span<const double> x) {
  assert(length_ > 0 && static_cast<int>(x.size()) == n_x_);
  std::memmove(data_.data(), data_.data() + n_x_, sizeof(double) * static_cast<std::size_t>(length_ - 1) * n_x_);
  std::copy(x.begin(), x.end(), data_.end() - n_x_);
}

// ---------------------------------------------------------------------------
// Horizon

int horizon(const Predicate&) { return 0; }
int horizon(const InnerFormula&) { return 0; }
int horizon(const SubFormula& f) { return f.t_end; }

static int horizon_node(const PhiNode& node, const std::vector<SubFormula>& subs) {
  if (node.kind == PhiNode::Kind::Leaf) return horizon(subs[node.leaf]);
  int h = 0;
  for (const auto& c : node.children) h = std::max(h, horizon_node(c, subs));
  return h;
}

int horizon(const Phi& phi) { return horizon_node(phi.root, phi.subs); }
int horizon(const Spec& spec) { return spec.horizon_end + horizon(spec.phi); }

// ---------------------------------------------------------------------------
// Semantics

static void check_window(const Trace& trace, int t, int hrz, const char* what) {
  if (t < 0 || t + hrz >= trace.length())
    throw WindowError(std::string(what) + ": window [" + std::to_string(t) + ", " + std::to_string(t + hrz) +
                      "] exceeds trace of length " + std::to_string(trace.length()));
}

static double predicate_margin(const Predicate& p, std::span<const double> x) {
  assert(p.coeffs.size() <= x.size());
  double h = 0.0;
  for (std::size_t i = 0; i < p.coeffs.size(); ++i) h += p.coeffs[i] * x[i];
  return p.bound - h;  // >= 0 iff h(x) <= bound
}

static bool sat_inner(const InnerFormula& f, std::span<const double> x) {
  switch (f.kind) {
    case InnerFormula::Kind::Pred:
      return predicate_margin(f.pred, x) >= 0.0;
    case InnerFormula::Kind::Not:
      return !sat_inner(f.children.front(), x);
    case InnerFormula::Kind::And:
      return std::all_of(f.children.begin(), f.children.end(), [&](const InnerFormula& c) { return sat_inner(c, x); });
    case InnerFormula::Kind::Or:
      return std::any_of(f.children.begin(), f.children.end(), [&](const InnerFormula& c) { return sat_inner(c, x); });
  }
  return false;
}

static double rob_inner(const InnerFormula& f, std::span<const double> x) {
  switch (f.kind) {
    case InnerFormula::Kind::Pred:
      return predicate_margin(f.pred, x);
    case InnerFormula::Kind::Not:
      return -rob_inner(f.children.front(), x);
    case InnerFormula::Kind::And: {
      double v = std::numeric_limits<double>::infinity();
      for (const auto& c : f.children) v = std::min(v, rob_inner(c, x));
      return v;
    }
    case InnerFormula::Kind::Or: {
      double v = -std::numeric_limits<double>::infinity();
      for (const auto& c : f.children) v = std::max(v, rob_inner(c, x));
      return v;
    }
  }
  return 0.0;
}

bool satisfies(const Trace& trace, int t, const InnerFormula& f) {
  check_window(trace, t, 0, "inner formula");
  return sat_inner(f, trace.state(t));
}

double robustness(const Trace& trace, int t, const Predicate& p) {
  check_window(trace, t, 0, "predicate");
  return predicate_margin(p, trace.state(t));
}

double robustness(const Trace& trace, int t, const InnerFormula& f) {
  check_window(trace, t, 0, "inner formula");
  return rob_inner(f, trace.state(t));
}

bool satisfies(const Trace& trace, int t, const SubFormula& f) {
  check_window(trace, t, horizon(f), "sub-formula");
  if (f.op == TemporalOp::Globally) {
    for (int u = t + f.t_start; u <= t + f.t_end; ++u)
      if (!sat_inner(f.body, trace.state(u))) return false;
    return true;
  }
  for (int u = t + f.t_start; u <= t + f.t_end; ++u)
    if (sat_inner(f.body, trace.state(u))) return true;
  return false;
}

double robustness(const Trace& trace, int t, const SubFormula& f) {
  check_window(trace, t, horizon(f), "sub-formula");
  double v = f.op == TemporalOp::Globally ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
  for (int u = t + f.t_start; u <= t + f.t_end; ++u) {
    const double r = rob_inner(f.body, trace.state(u));
    v = f.op == TemporalOp::Globally ? std::min(v, r) : std::max(v, r);
  }
  return v;
}

static bool sat_node(const Trace& trace, int t, const PhiNode& node, const std::vector<SubFormula>& subs) {
  switch (node.kind) {
    case PhiNode::Kind::Leaf:
      return satisfies(trace, t, subs[node.leaf]);
    case PhiNode::Kind::And:
      return std::all_of(node.children.begin(), node.children.end(),
                         [&](const PhiNode& c) { return sat_node(trace, t, c, subs); });
    case PhiNode::Kind::Or:
      return std::any_of(node.children.begin(), node.children.end(),
                         [&](const PhiNode& c) { return sat_node(trace, t, c, subs); });
  }
  return false;
}

static double rob_node(const Trace& trace, int t, const PhiNode& node, const std::vector<SubFormula>& subs) {
  switch (node.kind) {
    case PhiNode::Kind::Leaf:
      return robustness(trace, t, subs[node.leaf]);
    case PhiNode::Kind::And: {
      double v = std::numeric_limits<double>::infinity();
      for (const auto& c : node.children) v = std::min(v, rob_node(trace, t, c, subs));
      return v;
    }
    case PhiNode::Kind::Or: {
      double v = -std::numeric_limits<double>::infinity();
      for (const auto& c : node.children) v = std::max(v, rob_node(trace, t, c, subs));
      return v;
    }
  }
  return 0.0;
}

bool satisfies(const Trace& trace, int t, const Phi& phi) {
  check_window(trace, t, horizon(phi), "phi");
  return sat_node(trace, t, phi.root, phi.subs);
}

double robustness(const Trace& trace, int t, const Phi& phi) {
  check_window(trace, t, horizon(phi), "phi");
  return rob_node(trace, t, phi.root, phi.subs);
}

bool satisfies(const Trace& trace, int t, const Spec& spec) {
  check_window(trace, t, horizon(spec), "spec");
  for (int u = t; u <= t + spec.horizon_end; ++u) {
    const bool s = satisfies(trace, u, spec.phi);
    if (spec.outer_op == TemporalOp::Globally && !s) return false;
    if (spec.outer_op == TemporalOp::Finally && s) return true;
  }
  return spec.outer_op == TemporalOp::Globally;
}

double robustness(const Trace& trace, int t, const Spec& spec) {
  check_window(trace, t, horizon(spec), "spec");
  double v = spec.outer_op == TemporalOp::Globally ? std::numeric_limits<double>::infinity()
                                                   : -std::numeric_limits<double>::infinity();
  for (int u = t; u <= t + spec.horizon_end; ++u) {
    const double r = robustness(trace, u, spec.phi);
    v = spec.outer_op == TemporalOp::Globally ? std::min(v, r) : std::max(v, r);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Scanner {
 public:
  Scanner(const std::string& text, int n_x) : text_(text), n_x_(n_x) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < static_cast<int>(text_.size()) && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < static_cast<int>(text_.size()) ? text_[pos_] : '\0';
  }

  bool eat(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* context) {
    if (!eat(c)) fail(std::string("expected '") + c + "' " + context);
  }

  bool eat_str(const char* s) {
    skip_ws();
    const std::size_t n = std::strlen(s);
    if (text_.compare(pos_, n, s) == 0) {
      pos_ += static_cast<int>(n);
      return true;
    }
    return false;
  }

  // True iff the next tokens are G or F followed by '[' (a temporal operator).
  bool at_temporal() {
    skip_ws();
    if (pos_ >= static_cast<int>(text_.size())) return false;
    const char c = text_[pos_];
    if (c != 'G' && c != 'F') return false;
    int p = pos_ + 1;
    while (p < static_cast<int>(text_.size()) && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
    return p < static_cast<int>(text_.size()) && text_[p] == '[';
  }

  // True iff the parenthesized group starting at the next '(' contains a
  // temporal operator at its top nesting level or below.
  bool paren_group_has_temporal() {
    skip_ws();
    assert(pos_ < static_cast<int>(text_.size()) && text_[pos_] == '(');
    int depth = 0;
    for (int p = pos_; p < static_cast<int>(text_.size()); ++p) {
      const char c = text_[p];
      if (c == '(') ++depth;
      if (c == ')' && --depth == 0) return false;
      if ((c == 'G' || c == 'F') && depth >= 1) {
        int q = p + 1;
        while (q < static_cast<int>(text_.size()) && std::isspace(static_cast<unsigned char>(text_[q]))) ++q;
        if (q < static_cast<int>(text_.size()) && text_[q] == '[') return true;
      }
    }
    fail("unbalanced parentheses");
  }

  int parse_int(const char* what) {
    skip_ws();
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{} || ptr == text_.data() + pos_) fail(std::string("expected ") + what);
    pos_ = static_cast<int>(ptr - text_.data());
    return value;
  }

  double parse_number() {
    skip_ws();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{} || ptr == text_.data() + pos_) fail("expected a number");
    pos_ = static_cast<int>(ptr - text_.data());
    return value;
  }

  bool done() {
    skip_ws();
    return pos_ >= static_cast<int>(text_.size());
  }

  int pos() const { return pos_; }
  void rewind(int p) { pos_ = p; }
  int n_x() const { return n_x_; }

 private:
  const std::string& text_;
  int n_x_;
  int pos_ = 0;
};

struct Interval {
  int t_start;
  int t_end;
};

Interval parse_interval(Scanner& sc) {
  sc.expect('[', "to open a time interval");
  const int lo_pos = sc.pos();
  const int lo = sc.parse_int("interval start");
  sc.expect(',', "between interval bounds");
  const int hi = sc.parse_int("interval end");
  sc.expect(']', "to close the time interval");
  if (lo < 0) throw ParseError("interval start must be non-negative", lo_pos);
  if (lo > hi) throw ParseError("interval start exceeds interval end", lo_pos);
  return {lo, hi};
}

TemporalOp parse_temporal_op(Scanner& sc) {
  if (sc.eat('G')) return TemporalOp::Globally;
  if (sc.eat('F')) return TemporalOp::Finally;
  sc.fail("expected 'G' or 'F'");
}

int parse_var_index(Scanner& sc) {
  const int at = sc.pos();
  sc.expect('x', "to name a state variable");
  const int idx = sc.parse_int("variable index");
  if (idx < 0 || idx >= sc.n_x()) throw ParseError("variable index " + std::to_string(idx) + " out of range for n_x=" + std::to_string(sc.n_x()), at);
  return idx;
}

Predicate parse_predicate(Scanner& sc) {
  Predicate p;
  p.coeffs.assign(sc.n_x(), 0.0);
  const char first = sc.peek();
  if (first == 'x') {
    // x<i> >= c   or   x<i> <= c
    const int idx = parse_var_index(sc);
    if (sc.eat_str("<=")) {
      p.coeffs[idx] = 1.0;
      p.bound = sc.parse_number();
    } else if (sc.eat_str(">=")) {
      p.coeffs[idx] = -1.0;
      p.bound = -sc.parse_number();
    } else {
      sc.fail("expected '<=' or '>=' after state variable");
    }
    return p;
  }
  // linear form: c0*x<i0> (+|-) c1*x<i1> ... <= bound
  bool negate = false;
  for (;;) {
    double coeff = sc.parse_number();
    if (negate) coeff = -coeff;
    sc.expect('*', "between coefficient and variable");
    const int term_pos = sc.pos();
    const int idx = parse_var_index(sc);
    if (p.coeffs[idx] != 0.0) throw ParseError("variable x" + std::to_string(idx) + " repeated in predicate", term_pos);
    p.coeffs[idx] = coeff;
    if (sc.eat('+')) {
      negate = false;
    } else if (sc.peek() == '-') {
      // allow "a*x0-b*x1<=c"; distinguish from "<=" handled below
      sc.eat('-');
      negate = true;
    } else {
      break;
    }
  }
  if (!sc.eat_str("<=")) sc.fail("expected '<=' to close a linear predicate");
  p.bound = sc.parse_number();
  if (std::all_of(p.coeffs.begin(), p.coeffs.end(), [](double c) { return c == 0.0; }))
    sc.fail("predicate has no nonzero coefficient");
  return p;
}

InnerFormula parse_inner(Scanner& sc);

InnerFormula parse_inner_atom(Scanner& sc) {
  if (sc.at_temporal())
    sc.fail("temporal operator not allowed here; the fragment permits G/F only at the sub-formula level");
  if (sc.eat('!')) return InnerFormula::make_not(parse_inner_atom(sc));
  if (sc.eat('(')) {
    InnerFormula f = parse_inner(sc);
    sc.expect(')', "to close the group");
    return f;
  }
  return InnerFormula::make_pred(parse_predicate(sc));
}

// conjunction binds tighter than disjunction
InnerFormula parse_inner_and(Scanner& sc) {
  std::vector<InnerFormula> parts;
  parts.push_back(parse_inner_atom(sc));
  for (;;) {
    const int mark = sc.pos();
    if (!sc.eat_str("&&")) break;
    if (sc.at_temporal()) {  // the chain continues at the phi level instead
      sc.rewind(mark);
      break;
    }
    parts.push_back(parse_inner_atom(sc));
  }
  return InnerFormula::make_and(std::move(parts));
}

InnerFormula parse_inner(Scanner& sc) {
  std::vector<InnerFormula> parts;
  parts.push_back(parse_inner_and(sc));
  for (;;) {
    const int mark = sc.pos();
    if (!sc.eat_str("||")) break;
    if (sc.at_temporal()) {
      sc.rewind(mark);
      break;
    }
    parts.push_back(parse_inner_and(sc));
  }
  return InnerFormula::make_or(std::move(parts));
}

Phi parse_phi(Scanner& sc);

Phi parse_phi_term(Scanner& sc) {
  if (sc.at_temporal()) {
    SubFormula sub;
    sub.op = parse_temporal_op(sc);
    const Interval iv = parse_interval(sc);
    sub.t_start = iv.t_start;
    sub.t_end = iv.t_end;
    sc.expect('(', "after the sub-formula interval");
    sub.body = parse_inner(sc);
    sc.expect(')', "to close the sub-formula");
    return phi_leaf(std::move(sub));
  }
  if (sc.peek() == '(' && sc.paren_group_has_temporal()) {
    sc.eat('(');
    Phi phi = parse_phi(sc);
    sc.expect(')', "to close the group");
    return phi;
  }
  // bare state formula: shorthand for G[0,0](...)
  SubFormula sub;
  sub.op = TemporalOp::Globally;
  sub.body = parse_inner(sc);
  return phi_leaf(std::move(sub));
}

Phi parse_phi_and(Scanner& sc) {
  std::vector<Phi> parts;
  parts.push_back(parse_phi_term(sc));
  while (sc.eat_str("&&")) parts.push_back(parse_phi_term(sc));
  return phi_and(std::move(parts));
}

Phi parse_phi(Scanner& sc) {
  std::vector<Phi> parts;
  parts.push_back(parse_phi_and(sc));
  while (sc.eat_str("||")) parts.push_back(parse_phi_and(sc));
  return phi_or(std::move(parts));
}

}  // namespace

Spec parse_stl(const std::string& text, int n_x) {
  if (n_x <= 0) throw std::invalid_argument("n_x must be positive");
  Scanner sc(text, n_x);
  const TemporalOp outer = parse_temporal_op(sc);
  const int iv_pos = sc.pos();
  const Interval iv = parse_interval(sc);
  if (iv.t_start != 0) throw ParseError("the outermost interval must start at 0", iv_pos);
  sc.expect('(', "after the outer interval");
  Phi phi = parse_phi(sc);
  sc.expect(')', "to close the specification");
  if (!sc.done()) sc.fail("trailing input after the specification");
  return make_spec(outer, iv.t_end, std::move(phi));
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  assert(ec == std::errc{});
  return std::string(buf, ptr);
}

bool single_coeff(const Predicate& p, int& index) {
  index = -1;
  for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
    if (p.coeffs[i] == 0.0) continue;
    if (index >= 0) return false;
    index = static_cast<int>(i);
  }
  return index >= 0;
}

}  // namespace

std::string to_string(const Predicate& p) {
  int idx = -1;
  if (single_coeff(p, idx)) {
    if (p.coeffs[idx] == 1.0) return "x" + std::to_string(idx) + "<=" + format_number(p.bound);
    if (p.coeffs[idx] == -1.0) return "x" + std::to_string(idx) + ">=" + format_number(-p.bound);
  }
  std::string out;
  bool first = true;
  for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
    const double c = p.coeffs[i];
    if (c == 0.0) continue;
    if (!first) out += c < 0 ? "-" : "+";
    out += format_number(first ? c : std::abs(c));
    out += "*x" + std::to_string(i);
    first = false;
  }
  return out + "<=" + format_number(p.bound);
}

std::string to_string(const InnerFormula& f) {
  switch (f.kind) {
    case InnerFormula::Kind::Pred:
      return to_string(f.pred);
    case InnerFormula::Kind::Not: {
      const InnerFormula& c = f.children.front();
      if (c.kind == InnerFormula::Kind::Pred) return "!" + to_string(c);
      return "!(" + to_string(c) + ")";
    }
    case InnerFormula::Kind::And:
    case InnerFormula::Kind::Or: {
      const char* sep = f.kind == InnerFormula::Kind::And ? "&&" : "||";
      std::string out;
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) out += sep;
        const InnerFormula& c = f.children[i];
        const bool needs_parens = c.kind == InnerFormula::Kind::And || c.kind == InnerFormula::Kind::Or;
        out += needs_parens ? "(" + to_string(c) + ")" : to_string(c);
      }
      return out;
    }
  }
  return {};
}

std::string to_string(const SubFormula& f) {
  return std::string(f.op == TemporalOp::Globally ? "G" : "F") + "[" + std::to_string(f.t_start) + "," +
         std::to_string(f.t_end) + "](" + to_string(f.body) + ")";
}

static std::string to_string_node(const PhiNode& node, const std::vector<SubFormula>& subs) {
  switch (node.kind) {
    case PhiNode::Kind::Leaf:
      return to_string(subs[node.leaf]);
    case PhiNode::Kind::And:
    case PhiNode::Kind::Or: {
      const char* sep = node.kind == PhiNode::Kind::And ? "&&" : "||";
      std::string out;
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += sep;
        const PhiNode& c = node.children[i];
        const bool needs_parens = c.kind != PhiNode::Kind::Leaf;
        out += needs_parens ? "(" + to_string_node(c, subs) + ")" : to_string_node(c, subs);
      }
      return out;
    }
  }
  return {};
}

std::string to_string(const Phi& phi) { return to_string_node(phi.root, phi.subs); }

std::string to_string(const Spec& spec) {
  return std::string(spec.outer_op == TemporalOp::Globally ? "G" : "F") + "[0," + std::to_string(spec.horizon_end) +
         "](" + to_string(spec.phi) + ")";
}

}  // namespace stlncs
