#pragma once

namespace sentiment {

// Entry point of the sentiment tool. Returns the process exit status:
// 0 success, 1 usage or config error, 2 data error, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace sentiment
