// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "zakspec/version.hpp"

int main() {
  std::printf("zakspec %s (command-line driver under construction)\n", zakspec::version_string);
  return 0;
}
