#pragma once

#include <string>
#include <vector>

namespace cn {

// Entry point behind the cn binary, callable in-process. Returns 0 on
// success, 1 on usage or configuration errors, 2 on runtime failures.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);  // without the program name

}  // namespace cn
