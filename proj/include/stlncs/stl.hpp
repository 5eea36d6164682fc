#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlncs {

// Affine predicate over a state vector:  coeffs . x <= bound.
struct Predicate {
  std::vector<double> coeffs;
  double bound = 0.0;

  bool operator==(const Predicate&) const = default;
};

enum class TemporalOp { Globally, Finally };

// Boolean combination of predicates, evaluable at a single time point.
// And/Or nodes are n-ary and kept flattened so that structurally equal
// formulas compare equal regardless of how the source was parenthesized.
struct InnerFormula {
  enum class Kind { Pred, Not, And, Or };

  Kind kind = Kind::Pred;
  Predicate pred;                      // Kind::Pred only
  std::vector<InnerFormula> children;  // Not: 1, And/Or: >= 2

  static InnerFormula make_pred(Predicate p);
  static InnerFormula make_not(InnerFormula f);
  static InnerFormula make_and(std::vector<InnerFormula> fs);
  static InnerFormula make_or(std::vector<InnerFormula> fs);

  bool operator==(const InnerFormula&) const = default;
};

// One temporal sub-formula: G_[ts,te] body  or  F_[ts,te] body.
struct SubFormula {
  TemporalOp op = TemporalOp::Globally;
  int t_start = 0;
  int t_end = 0;
  InnerFormula body;

  bool operator==(const SubFormula&) const = default;
};

// And/Or combiner tree whose leaves are indices into Phi::subs.
struct PhiNode {
  enum class Kind { Leaf, And, Or };

  Kind kind = Kind::Leaf;
  int leaf = -1;
  std::vector<PhiNode> children;

  bool operator==(const PhiNode&) const = default;
};

struct Phi {
  PhiNode root;
  std::vector<SubFormula> subs;  // document order; fixes the flag layout

  bool operator==(const Phi&) const = default;
};

// Builders that keep Phi::subs consistent with the combiner tree.
Phi phi_leaf(SubFormula sub);
Phi phi_and(std::vector<Phi> parts);
Phi phi_or(std::vector<Phi> parts);

// Top-level specification:  outer_op over [0, horizon_end] of phi.
struct Spec {
  TemporalOp outer_op = TemporalOp::Globally;
  int horizon_end = 0;  // T_e
  Phi phi;
  int tau = 1;            // horizon(phi) + 1
  int total_horizon = 0;  // horizon_end + tau - 1

  bool operator==(const Spec&) const = default;
};

Spec make_spec(TemporalOp outer, int horizon_end, Phi phi);

// Finite trajectory of fixed-dimension states, flat row-major storage.
class Trace {
 public:
  Trace() = default;
  Trace(int n_x, int length) : data_(static_cast<std::size_t>(n_x) * length), n_x_(n_x), length_(length) {}

  static Trace from_states(const std::vector<std::vector<double>>& states);

  int dim() const { return n_x_; }
  int length() const { return length_; }

  std::span<const double> state(int t) const {
    return {data_.data() + static_cast<std::size_t>(t) * n_x_, static_cast<std::size_t>(n_x_)};
  }
  void set_state(int t, std::span<const double> x);
  void push_back(std::span<const double> x);
  // Drops the oldest state and appends x; length is unchanged.
  void shift_append(std::span<const double> x);

  const std::vector<double>& flat() const { return data_; }

  bool operator==(const Trace&) const = default;

 private:
  std::vector<double> data_;
  int n_x_ = 0;
  int length_ = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"), position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

class WindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses the bounded G/F fragment. A bare predicate combination where a
// sub-formula is expected is shorthand for G[0,0](...).
Spec parse_stl(const std::string& text, int n_x);

std::string to_string(const Predicate& p);
std::string to_string(const InnerFormula& f);
std::string to_string(const SubFormula& f);
std::string to_string(const Phi& phi);
std::string to_string(const Spec& spec);

int horizon(const Predicate&);
int horizon(const InnerFormula&);
int horizon(const SubFormula&);
int horizon(const Phi&);
int horizon(const Spec&);

bool satisfies(const Trace& trace, int t, const InnerFormula& f);
bool satisfies(const Trace& trace, int t, const SubFormula& f);
bool satisfies(const Trace& trace, int t, const Phi& phi);
bool satisfies(const Trace& trace, int t, const Spec& spec);

double robustness(const Trace& trace, int t, const Predicate& p);
double robustness(const Trace& trace, int t, const InnerFormula& f);
double robustness(const Trace& trace, int t, const SubFormula& f);
double robustness(const Trace& trace, int t, const Phi& phi);
double robustness(const Trace& trace, int t, const Spec& spec);

// The M sub-formula leaves in document order.
inline const std::vector<SubFormula>& decompose(const Phi& phi) { return phi.subs; }

}  // namespace stlncs
