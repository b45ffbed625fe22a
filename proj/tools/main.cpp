#include "cli.hpp"

int main(int argc, char** argv)
{
    return stereodiff::cli::run(argc, argv);
}
