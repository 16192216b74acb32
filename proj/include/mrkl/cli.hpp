#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mrkl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Flat key=value lines; '#' starts a comment. Throws std::runtime_error.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> load_config(const std::string& path);

/// Runs one command line (without the program name). Reads REPL input from
/// `in`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace mrkl::cli
