#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "popsym/core.hpp"

namespace popsym {

// Line-oriented protocol text:
//
//   protocol <name>
//   states: <state>, ...
//   inputs: <symbol> -> <state>, ...
//   outputs: <state> -> <symbol>, ... ; default -> <symbol>
//   rules:
//     [sym:] <a> <b> -> <c> <d>
//
// '#' starts a comment. The states line may be left out, in which case the
// states named on the inputs and outputs lines are the state set.
// `sym:` also emits the mirrored rule (b,a) -> (d,c).
// The output alphabet is the sorted set of symbols named in the outputs line.
Protocol parse_protocol(std::string_view text);
std::string serialize_protocol(const Protocol& p);

// Tuple states (role, value) are named <role>_<value> with a leading 'm' for
// negative values: (l,-1) -> l_m1, (f,0) -> f_0.
std::string tuple_state_name(std::string_view role, int value);

/// Count-to-x over states q0..qx.
Protocol gen_count_to_x(unsigned x);
/// Threshold protocol for sum a_i N_i >= c; coefficients above c map straight to q_c.
Protocol gen_positive_linear_combination(const std::vector<unsigned>& coefficients, unsigned threshold);
Protocol gen_majority();
Protocol gen_k_majority(unsigned k);
/// Four-state leader-merge parity protocol (L0, L1, F0, F1).
Protocol gen_parity_leader();

}  // namespace popsym
