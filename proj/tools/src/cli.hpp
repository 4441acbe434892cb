#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gebc::cli {

// `args` excludes the program name. Artifacts that have no output path go
// to `out`; diagnostics go to `err`. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gebc::cli
