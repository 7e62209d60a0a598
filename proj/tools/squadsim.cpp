#include <fstream>
#include <iostream>

#include "squadsim/cli.hpp"

int main(int argc, char** argv) {
  using namespace squadsim::cli;
  auto parsed = parse_args(argc, argv);
  if (const int* code = std::get_if<int>(&parsed)) return *code;
  const RunConfig& rc = std::get<RunConfig>(parsed);

  auto path = output_path(rc);
  if (!path) return run_sweep(rc, std::cout, std::cerr);
  if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
  std::ofstream csv(*path);
  if (!csv) {
    std::cerr << "config error: cannot write " << path->string() << '\n';
    return 2;
  }
  int code = run_sweep(rc, csv, std::cerr);
  std::cerr << "wrote " << path->string() << '\n';
  return code;
}
