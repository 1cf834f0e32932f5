// Command-line front end: solve | converge | analyze, driven by a config file.
#include <bilopt/runner.hpp>

#include <cstdio>
#include <cstring>
#include <string>

namespace {

void usage() {
  std::fprintf(stderr,
               "usage: bilopt <solve|converge|analyze> <config.ini>\n"
               "\n"
               "  solve     optimize the control on one mesh, write field CSVs\n"
               "  converge  mesh-refinement study of the control error, write converge.csv\n"
               "  analyze   structure / second-order / no-growth / bound checks\n"
               "\n"
               "The output directory comes from [output] directory, overridden by the\n"
               "BILOPT_OUTPUT_DIR environment variable.  Exit codes: 0 success,\n"
               "1 solver failure, 2 configuration error.\n");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 2 && (std::strcmp(argv[1], "--version") == 0)) {
    std::printf("%s\n", bilopt::kVersionString);
    return 0;
  }
  if (argc != 3) {
    usage();
    return 2;
  }
  const std::string command = argv[1];
  try {
    const bilopt::RunConfig config = bilopt::parse_config_file(argv[2]);
    if (command == "solve") {
      bilopt::run_solve(config);
    } else if (command == "converge") {
      bilopt::run_converge(config);
    } else if (command == "analyze") {
      bilopt::run_analyze(config);
    } else {
      std::fprintf(stderr, "unknown command '%s'\n", command.c_str());
      usage();
      return 2;
    }
  } catch (const bilopt::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
