#include <iostream>

#include "ergoloop/run.hpp"

int main(int argc, char** argv) {
  const ergoloop::ParseOutcome parsed = ergoloop::parse_config(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message;
    return parsed.exit_code;
  }
  try {
    return ergoloop::run(*parsed.config).exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
