// Command-line surface. `run_cli` takes the arguments after the program name
// and returns the process exit code: 0 success, 1 usage, 2 I/O,
// 3 shape/domain, 4 numeric failure.

#ifndef PANLUT_CLI_HPP
#define PANLUT_CLI_HPP

#include <string>
#include <vector>

namespace panlut {

int run_cli(const std::vector<std::string>& args);

} // namespace panlut

#endif
