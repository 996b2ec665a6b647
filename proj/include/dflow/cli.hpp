#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dflow {

// `flow` command line (args exclude argv[0]); streams injectable for tests.
// Subcommands: check, graph, run, partition, serve, testsvc, bench.
// Exit codes: 0 success, 1 compile/run failure, 2 I/O failure, 64 usage error.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dflow
