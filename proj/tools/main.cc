#include "comatcher/cli/commands.h"

int main(int argc, char** argv) { return comatcher::Dispatch(argc, argv); }
