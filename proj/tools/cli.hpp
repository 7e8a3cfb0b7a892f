#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace xrel::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInputData = 3, kIo = 4 };

/// Runs the xrel command line. `args` excludes the program name. When
/// `seed_override` is set it replaces the default seed (used by replay).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace xrel::cli
