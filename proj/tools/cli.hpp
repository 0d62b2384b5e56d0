#pragma once

#include <string>
#include <vector>

namespace floodreg::cli {

// Entry point behind the `floodreg` binary; also linked by the tests.
// Returns 0 on success, 1 on runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace floodreg::cli
