#include <iostream>

#include "cpoll/cli.hpp"

int main(int argc, char** argv)
{
    return cpoll::cli::run(argc, argv, std::cout, std::cerr);
}
