#pragma once

#include <iosfwd>

namespace regret_lab {

/// Entry point of the regret-lab command line. Returns the process exit
/// status: 0 iff every invoked suite passed.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace regret_lab
