#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stkgqa {

// Runs one CLI invocation (argv without the program name). Declared here so
// tests can drive subcommands in-process; tools/stkgqa.cpp is a thin
// wrapper.
//
// Subcommands: ingest, gen-dataset, train-embed, eval-embed, train-qa,
// eval-qa, answer, stats.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stkgqa
