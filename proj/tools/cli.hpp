#pragma once

#include <iosfwd>

namespace gpem {

// Exit codes: 0 ok, 1 usage, 2 no valid scenario / solver failure, 3 file I/O.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gpem
