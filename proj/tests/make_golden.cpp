// Regenerates the golden files: corelens_make_golden <tests/golden dir>

#include <fstream>
#include <iostream>

#include "golden_cases.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: corelens_make_golden <dir>\n";
    return 1;
  }
  const std::string dir = argv[1];
  auto emit = [&](const auto& cases) {
    for (const auto& [name, make] : cases) {
      std::ofstream f(dir + "/" + name, std::ios::binary);
      f << make();
      std::cout << "wrote " << name << "\n";
    }
  };
  emit(corelens::testing::svg_cases());
  emit(corelens::testing::nrdf_cases());
  return 0;
}
