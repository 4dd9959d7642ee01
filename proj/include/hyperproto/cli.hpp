#ifndef HYPERPROTO_CLI_HPP
#define HYPERPROTO_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace hyperproto::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one subcommand (prototypes, priors, assign, train, eval, project, synth).
// args excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyperproto::cli

#endif  // HYPERPROTO_CLI_HPP
