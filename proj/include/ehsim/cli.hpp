#pragma once

#include <string>
#include <vector>

namespace ehsim {

/// Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

/// The generated configuration reference: every key, default and meaning.
std::string config_reference_text();

}  // namespace ehsim
