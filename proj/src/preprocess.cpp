#include "stlncs/preprocess.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlncs {

double flag_value(const Trace& window, const SubFormula& sub) {
  if (window.length() < sub.t_end + 1)
    throw WindowError("flag window of length " + std::to_string(window.length()) +
                      " is shorter than the sub-formula horizon " + std::to_string(sub.t_end + 1));
  const double width = sub.t_end - sub.t_start + 1;
  if (sub.op == TemporalOp::Finally) {
    for (int l = sub.t_end; l >= sub.t_start; --l)
      if (satisfies(window, l, sub.body)) return (l - sub.t_start + 1) / width;
    return -std::numeric_limits<double>::infinity();
  }
  // Globally: satisfaction must persist through t_end, so scan the suffix.
  if (!satisfies(window, sub.t_end, sub.body)) return -std::numeric_limits<double>::infinity();
  int l = sub.t_end;
  while (l > sub.t_start && satisfies(window, l - 1, sub.body)) --l;
  return (sub.t_end - l + 1) / width;
}

double transform_flag(double f) {
  return std::isinf(f) ? -0.5 : f - 0.5;
}

FlagVector compute_flags(const Trace& window, const std::vector<SubFormula>& subs) {
  FlagVector flags;
  flags.raw.reserve(subs.size());
  flags.transformed.reserve(subs.size());
  for (const auto& sub : subs) {
    const double f = flag_value(window, sub);
    flags.raw.push_back(f);
    flags.transformed.push_back(transform_flag(f));
  }
  return flags;
}

PreprocessedState preprocess_state(const ExtendedState& z, const std::vector<SubFormula>& subs) {
  if (subs.empty()) throw std::invalid_argument("at least one sub-formula is required");
  PreprocessedState out;
  const auto current = z.window.state(z.tau() - 1);
  out.current_state.assign(current.begin(), current.end());
  out.flags = compute_flags(z.window, subs).transformed;
  out.action_history = z.history;
  return out;
}

std::vector<double> flatten(const PreprocessedState& s) {
  std::vector<double> out;
  out.reserve(s.flat_size());
  out.insert(out.end(), s.current_state.begin(), s.current_state.end());
  out.insert(out.end(), s.flags.begin(), s.flags.end());
  out.insert(out.end(), s.action_history.begin(), s.action_history.end());
  return out;
}

}  // namespace stlncs
