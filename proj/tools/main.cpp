#include "wgan2d/cli.hpp"

int main(int argc, char** argv)
{
    return wgan2d::cli_main(argc, argv);
}
