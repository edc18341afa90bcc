#include "patchaudit/cli.hpp"

int main(int argc, char** argv) {
  return patchaudit::run_cli(argc, argv);
}
