#include <iostream>
#include <string>
#include <vector>

#include "vortspec_cli/app.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return vortspec::cli::run(args, std::cout, std::cerr);
}
