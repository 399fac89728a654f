// Integration gate: runs every acceptance check and exits nonzero if any
// fails. Same checks as `rpcl verify`.
#include <iostream>

#include "rpcl/acceptance.hpp"

int main() {
    rpcl::acceptance::Options options;
    return rpcl::acceptance::run_cli(options, std::cout);
}
