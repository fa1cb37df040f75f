#pragma once

#include <string>
#include <vector>

namespace smeq {

/// Entry point of the command-line front end. Exit codes: 0 success,
/// 1 domain/numerical error, 2 usage or config error.
int cli_main(int argc, char** argv);

/// Same, for in-process callers (tests).
int cli_run(const std::vector<std::string>& args);

}  // namespace smeq
