#pragma once

namespace frontier {

// Command-line front end. Returns the process exit code: 0 on success, 1 on
// data or validation errors, 2 on usage errors, 3 on numerical failures.
// Diagnostics go to stderr; data goes to the output directory, or to stdout
// when no directory is given.
int run_cli(int argc, char** argv);

}  // namespace frontier
