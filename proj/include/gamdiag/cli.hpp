#pragma once

namespace gamdiag {

/// Entry point of the `gamdiag` command. Returns 0 on success, 1 on engine
/// errors and 2 on usage errors.
int run_cli(int argc, const char* const* argv);

}  // namespace gamdiag
