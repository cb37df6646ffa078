#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv)
{
    return slowvary::cli::main_entry(argc, argv, std::cout, std::cerr);
}
