#include <iostream>

#include "ichem/cli.hpp"

int main(int argc, char** argv)
{
    return ichem::cli::run(argc, argv, std::cout, std::cerr);
}
