// Writes a planted fixture to disk: make_planted_fixture <dir> [seed] [tokens]
#include <cstdlib>
#include <iostream>

#include "planted.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_planted_fixture <dir> [seed] [tokens]\n";
    return 2;
  }
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  embfuse::testing::PlantedOptions options;
  if (argc > 3) options.target_tokens = std::strtoull(argv[3], nullptr, 10);
  embfuse::testing::write_planted_fixture(embfuse::testing::make_planted_fixture(seed, options), argv[1]);
  return 0;
}
