#pragma once

namespace echelon {

// Exit codes: 0 success, 2 scenario or argument validation failure,
// 3 runtime failure (I/O and the like).
int run_cli(int argc, const char* const* argv);

}  // namespace echelon
