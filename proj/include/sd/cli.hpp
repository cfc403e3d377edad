#pragma once

namespace sd::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Runs one sdpipe subcommand. Returns 0 on success, 1 on usage errors and
/// 2 on data errors.
int run(int argc, char** argv);

} // namespace sd::cli
