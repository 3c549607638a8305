#pragma once

#include <string>
#include <vector>

namespace dail {

/// Entry point behind the `dail` binary. Subcommands: gen, train, eval,
/// gradcheck, ablate. Returns 0 on success, 1 on usage errors, 2 on
/// runtime/validation failures.
int run_command(const std::vector<std::string>& args);

}  // namespace dail
