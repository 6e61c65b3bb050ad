#pragma once

#include <string>
#include <vector>

namespace comatcher {

// Semantic version of the library and tools.
std::string VersionString();

// Runs the command line and returns the exit code: 0 success, 1 usage
// error, 2 data error, 3 numeric failure. Messages go to standard error.
int Dispatch(const std::vector<std::string>& args);
int Dispatch(int argc, char** argv);

}  // namespace comatcher
