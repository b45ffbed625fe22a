#pragma once

#include <string>
#include <vector>

namespace stereodiff::cli {

enum ExitCode : int {
    kOk = 0,
    kInvariant = 1,
    kIo = 2,
    kProtocol = 3,
};

int run(int argc, char** argv);
/// Same as above; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace stereodiff::cli
