#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qtele::cli {

/// Exit codes: 0 all checks passed (or a claim check completed), 1 assertion
/// failure, 2 configuration or usage error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace qtele::cli
