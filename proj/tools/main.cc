#include "cli.h"

int main(int argc, char** argv) { return vecstab::cli::Main(argc, argv); }
