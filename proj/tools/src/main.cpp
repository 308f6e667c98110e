#include <cstdlib>
#include <iostream>
#include <string>

#include "cli.hpp"
#include "fixpoint/parallel.hpp"

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("FIXPOINT_THREADS")) {
    try {
      const long count = std::stol(threads);
      if (count < 1) throw std::out_of_range("threads");
      fixpoint::set_worker_count(static_cast<std::size_t>(count));
    } catch (const std::exception&) {
      std::cerr << "error: FIXPOINT_THREADS must be a positive integer, got '" << threads << "'\n";
      return fixpoint::cli::invalid_arguments;
    }
  }
  return fixpoint::cli::run(argc, argv, std::cout, std::cerr);
}
