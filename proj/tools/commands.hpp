#pragma once

#include <string>
#include <vector>

#include "ldct/config.hpp"

namespace ldct::cli {

/// One parsed command: the config file (if any) with command-line flags layered on top.
struct Invocation {
    std::string command;
    std::vector<std::string> argv;
    KeyValueConfig cfg;
};

int run_simulate(const Invocation& inv);
int run_train(const Invocation& inv);
int run_reconstruct(const Invocation& inv);
int run_evaluate(const Invocation& inv);
int run_verify(const std::string& manifest);

/// "1e4" for 10000, "5e3" for 5000; falls back to %g when that loses digits.
std::string dose_tag(double i0);

}  // namespace ldct::cli
