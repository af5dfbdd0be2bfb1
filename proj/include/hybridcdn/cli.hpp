#pragma once

#include <iosfwd>

namespace hybridcdn {

/// Exit codes: 0 success, 1 configuration/data error or table mismatch,
/// 2 usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace hybridcdn
