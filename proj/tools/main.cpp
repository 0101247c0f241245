// SPDX-License-Identifier: Apache-2.0

#include "mortau/harness.hpp"

int main(int argc, char **argv) { return mortau::cli_main(argc, argv); }
