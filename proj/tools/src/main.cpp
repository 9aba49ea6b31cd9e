#include <iostream>

#include "quizforge/cli.hpp"

int main(int argc, char** argv) {
  return quizforge::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
