#include "lpcm/cli.hpp"

int main(int argc, char** argv)
{
    return lpcm::run_cli(argc, argv);
}
