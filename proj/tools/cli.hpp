#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace infodist {

/// Entry point of the infodist command. `args` excludes the program name.
/// Reports and error objects go to `out`, usage text to `err`. Returns the
/// process exit code: 0 on success, 1 on a library error, 2 on bad usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace infodist
