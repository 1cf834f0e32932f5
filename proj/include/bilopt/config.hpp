#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilopt {

/// Malformed or unknown configuration input; the command line maps this to
/// exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat-section run configuration.  Unknown sections or keys are hard errors.
struct RunConfig {
  // [problem]
  std::string kind = "manufactured_cubic";  // manufactured_linear|manufactured_cubic|custom
  double amplitude = 4.0;
  double alpha = 0.0;
  double beta = 1.0;
  double omega[4] = {0.25, 0.25, 0.75, 0.75};
  // custom-kind coefficients
  double a11 = 1.0, a12 = 0.0, a22 = 1.0, a0 = 0.0;
  std::string b = "zero";    // zero|linear|cubic
  std::string f = "zero";    // zero|one
  std::string y_d = "zero";  // zero|one

  // [mesh]
  int n = 16;
  std::vector<int> levels = {8, 16, 32, 64};

  // [optimizer]
  double c_tik = 1.0;
  int max_iterations = 5000;
  double tolerance = 1e-9;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  double initial = std::numeric_limits<double>::quiet_NaN();

  // [analysis]
  bool structure = true;
  bool soc = true;
  bool no_growth = true;
  bool bound = true;
  std::vector<double> tau_factors = {0.05, 0.1, 0.2};
  int directions = 200;
  int growth_samples = 500;
  long sample_points = 1000000;
  std::vector<int> stripes = {2, 4, 8, 16, 32};

  // [output]
  std::string directory = "out";
  unsigned seed = 42;
  int threads = 1;

  std::string raw_text;  // verbatim input, echoed into the output directory
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace bilopt
