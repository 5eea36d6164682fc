#pragma once

#include <vector>

#include "stlncs/stl.hpp"
#include "stlncs/taud.hpp"

namespace stlncs {

struct FlagVector {
  std::vector<double> raw;          // in (0,1] or -infinity
  std::vector<double> transformed;  // in [-1/2, 1/2]
};

// Normalized progress of one sub-formula over the state window.
//   G[ts,te]: largest (te-l+1)/(te-ts+1) over l such that the body holds at
//             every index in [l, te];
//   F[ts,te]: largest (l-ts+1)/(te-ts+1) over l in [ts,te] where the body
//             holds.
// Returns -infinity when no such l exists.
double flag_value(const Trace& window, const SubFormula& sub);

// f - 1/2 for finite flags, -1/2 otherwise; keeps network inputs bounded.
double transform_flag(double f);

FlagVector compute_flags(const Trace& window, const std::vector<SubFormula>& subs);

// Compressed network input: current state, transformed flags, action history.
struct PreprocessedState {
  std::vector<double> current_state;
  std::vector<double> flags;
  std::vector<double> action_history;

  std::size_t flat_size() const { return current_state.size() + flags.size() + action_history.size(); }
};

PreprocessedState preprocess_state(const ExtendedState& z, const std::vector<SubFormula>& subs);

std::vector<double> flatten(const PreprocessedState& s);

}  // namespace stlncs
