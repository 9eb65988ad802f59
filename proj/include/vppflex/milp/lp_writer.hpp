#pragma once

#include <iosfwd>

#include "vppflex/milp/problem.hpp"

namespace vppflex::milp {

/// Writes the problem in CPLEX LP text format, for cross-checking with
/// external solvers. Names are sanitized to the LP identifier alphabet.
void write_lp(std::ostream& out, const MilpProblem& problem);

}  // namespace vppflex::milp
