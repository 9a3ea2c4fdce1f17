#pragma once

#include <string>
#include <vector>

namespace lowmach {

/// Exit codes: 0 success, 2 usage or configuration problems (including
/// unusable geometry or resolution), 3 numerical or fitting failures.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace lowmach
