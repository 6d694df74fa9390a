#include "cn/cli.hpp"

int main(int argc, char** argv) {
    return cn::cli_main(argc, argv);
}
