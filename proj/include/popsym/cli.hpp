#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace popsym {

// Entry point of the popsym tool. args excludes the program name.
// Exit codes: 0 success, 1 domain error, 2 usage error. Errors are written
// to err as one line: "error: <kind>: <message>".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace popsym
