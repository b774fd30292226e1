#include "plnet/cli.hpp"

int main(int argc, char** argv) {
    return plnet::run_cli(argc, argv);
}
