#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gbts {

// Exit codes: 0 success (queries entailed), 1 not entailed, 2 error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gbts
