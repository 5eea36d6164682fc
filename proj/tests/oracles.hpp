#pragma once

// Independent brute-force reference implementations used only by tests.
// These transcribe the Boolean semantics and the flag definitions literally
// and share no evaluation code with the library.

#include <limits>
#include <vector>

#include "stlncs/rng.hpp"
#include "stlncs/stl.hpp"

namespace oracle {

inline bool pred_holds(const stlncs::Predicate& p, std::span<const double> x) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.coeffs.size(); ++i) h += p.coeffs[i] * x[i];
  return h <= p.bound;
}

inline bool inner_holds(const stlncs::InnerFormula& f, std::span<const double> x) {
  using Kind = stlncs::InnerFormula::Kind;
  switch (f.kind) {
    case Kind::Pred:
      return pred_holds(f.pred, x);
    case Kind::Not:
      return !inner_holds(f.children.front(), x);
    case Kind::And: {
      bool all = true;
      for (const auto& c : f.children) all = all && inner_holds(c, x);
      return all;
    }
    case Kind::Or: {
      bool any = false;
      for (const auto& c : f.children) any = any || inner_holds(c, x);
      return any;
    }
  }
  return false;
}

inline bool sub_holds(const stlncs::Trace& trace, int t, const stlncs::SubFormula& f) {
  if (f.op == stlncs::TemporalOp::Globally) {
    for (int u = t + f.t_start; u <= t + f.t_end; ++u)
      if (!inner_holds(f.body, trace.state(u))) return false;
    return true;
  }
  for (int u = t + f.t_start; u <= t + f.t_end; ++u)
    if (inner_holds(f.body, trace.state(u))) return true;
  return false;
}

inline bool phi_node_holds(const stlncs::Trace& trace, int t, const stlncs::PhiNode& node,
                           const std::vector<stlncs::SubFormula>& subs) {
  using Kind = stlncs::PhiNode::Kind;
  switch (node.kind) {
    case Kind::Leaf:
      return sub_holds(trace, t, subs[node.leaf]);
    case Kind::And: {
      bool all = true;
      for (const auto& c : node.children) all = all && phi_node_holds(trace, t, c, subs);
      return all;
    }
    case Kind::Or: {
      bool any = false;
      for (const auto& c : node.children) any = any || phi_node_holds(trace, t, c, subs);
      return any;
    }
  }
  return false;
}

inline bool phi_holds(const stlncs::Trace& trace, int t, const stlncs::Phi& phi) {
  return phi_node_holds(trace, t, phi.root, phi.subs);
}

inline bool spec_holds(const stlncs::Trace& trace, int t, const stlncs::Spec& spec) {
  if (spec.outer_op == stlncs::TemporalOp::Globally) {
    for (int u = t; u <= t + spec.horizon_end; ++u)
      if (!phi_holds(trace, u, spec.phi)) return false;
    return true;
  }
  for (int u = t; u <= t + spec.horizon_end; ++u)
    if (phi_holds(trace, u, spec.phi)) return true;
  return false;
}

// Literal double-loop transcription of the flag definitions.
inline double flag_brute_force(const stlncs::Trace& window, const stlncs::SubFormula& sub) {
  double best = -std::numeric_limits<double>::infinity();
  const double width = sub.t_end - sub.t_start + 1;
  if (sub.op == stlncs::TemporalOp::Globally) {
    for (int l = sub.t_start; l <= sub.t_end; ++l) {
      bool suffix = true;
      for (int lp = l; lp <= sub.t_end; ++lp)
        if (!inner_holds(sub.body, window.state(lp))) suffix = false;
      if (suffix) best = std::max(best, (sub.t_end - l + 1) / width);
    }
    return best;
  }
  for (int l = sub.t_start; l <= sub.t_end; ++l)
    if (inner_holds(sub.body, window.state(l))) best = std::max(best, (l - sub.t_start + 1) / width);
  return best;
}

// ---------------------------------------------------------------------------
// Random instances within the fragment

inline stlncs::Predicate random_predicate(stlncs::RngStream& rng, int n_x) {
  stlncs::Predicate p;
  p.coeffs.assign(n_x, 0.0);
  const int terms = 1 + static_cast<int>(rng.uniform01() * n_x);
  for (int i = 0; i < terms; ++i)
    p.coeffs[static_cast<int>(rng.uniform01() * n_x)] = rng.uniform(-2.0, 2.0);
  bool any = false;
  for (double c : p.coeffs) any = any || c != 0.0;
  if (!any) p.coeffs[0] = 1.0;
  p.bound = rng.uniform(-2.0, 2.0);
  return p;
}

inline stlncs::InnerFormula random_inner(stlncs::RngStream& rng, int n_x, int depth) {
  const double roll = rng.uniform01();
  if (depth <= 0 || roll < 0.4) return stlncs::InnerFormula::make_pred(random_predicate(rng, n_x));
  if (roll < 0.55) return stlncs::InnerFormula::make_not(random_inner(rng, n_x, depth - 1));
  std::vector<stlncs::InnerFormula> children;
  const int n = 2 + static_cast<int>(rng.uniform01() * 2);
  for (int i = 0; i < n; ++i) children.push_back(random_inner(rng, n_x, depth - 1));
  return roll < 0.8 ? stlncs::InnerFormula::make_and(std::move(children))
                    : stlncs::InnerFormula::make_or(std::move(children));
}

inline stlncs::SubFormula random_sub(stlncs::RngStream& rng, int n_x, int max_end) {
  stlncs::SubFormula sub;
  sub.op = rng.uniform01() < 0.5 ? stlncs::TemporalOp::Globally : stlncs::TemporalOp::Finally;
  sub.t_start = static_cast<int>(rng.uniform01() * (max_end + 1));
  sub.t_end = sub.t_start + static_cast<int>(rng.uniform01() * (max_end - sub.t_start + 1));
  sub.body = random_inner(rng, n_x, 2);
  return sub;
}

inline stlncs::Phi random_phi(stlncs::RngStream& rng, int n_x, int max_end, int depth) {
  if (depth <= 0 || rng.uniform01() < 0.45) return stlncs::phi_leaf(random_sub(rng, n_x, max_end));
  std::vector<stlncs::Phi> parts;
  const int n = 2 + static_cast<int>(rng.uniform01() * 2);
  for (int i = 0; i < n; ++i) parts.push_back(random_phi(rng, n_x, max_end, depth - 1));
  return rng.uniform01() < 0.5 ? stlncs::phi_and(std::move(parts)) : stlncs::phi_or(std::move(parts));
}

inline stlncs::Spec random_spec(stlncs::RngStream& rng, int n_x, int max_sub_end, int max_outer_end) {
  return stlncs::make_spec(rng.uniform01() < 0.5 ? stlncs::TemporalOp::Globally : stlncs::TemporalOp::Finally,
                           static_cast<int>(rng.uniform01() * (max_outer_end + 1)),
                           random_phi(rng, n_x, max_sub_end, 2));
}

inline stlncs::Trace random_trace(stlncs::RngStream& rng, int n_x, int length, double span = 2.5) {
  stlncs::Trace trace(n_x, length);
  std::vector<double> x(n_x);
  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < n_x; ++i) x[i] = rng.uniform(-span, span);
    trace.set_state(t, x);
  }
  return trace;
}

}  // namespace oracle
