#include <cstdlib>
#include <iostream>
#include <string>

#include "vortspec_cli/acceptance.hpp"

// One PASS/FAIL line per criterion; exit status 1 when any criterion fails.
int main(int argc, char** argv)
{
    vortspec::cli::AcceptanceOptions opt;
    for (int i = 1; i < argc; ++i) opt.only.push_back(std::atoi(argv[i]));
    const auto results = vortspec::cli::run_acceptance(opt, &std::cout);
    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (failed == 0 ? "ALL PASS" : "FAILED " + std::to_string(failed)) << " (" << results.size()
              << " criteria)" << std::endl;
    return failed == 0 ? 0 : 1;
}
