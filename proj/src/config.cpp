#include <bilopt/config.hpp>

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace bilopt {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + value + "'");
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& key, const std::string& value, Fn one) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(one(key, trim(item)));
  if (out.empty()) throw ConfigError("config: key '" + key + "' expects a nonempty list");
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  config.raw_text = text;
  std::stringstream ss(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section");
      section = line.substr(1, line.size() - 2);
      if (section != "problem" && section != "mesh" && section != "optimizer" &&
          section != "analysis" && section != "output")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config: key '" + key + "' appears before any section");

    auto as_int = [](const std::string& k, const std::string& v) {
      return static_cast<int>(parse_long(k, v));
    };

    if (section == "problem") {
      if (key == "kind") {
        if (value != "manufactured_linear" && value != "manufactured_cubic" &&
            value != "custom")
          throw ConfigError("config: unknown problem kind '" + value + "'");
        config.kind = value;
      } else if (key == "amplitude") {
        config.amplitude = parse_double(key, value);
      } else if (key == "alpha") {
        config.alpha = parse_double(key, value);
      } else if (key == "beta") {
        config.beta = parse_double(key, value);
      } else if (key == "omega") {
        const auto v = parse_list<double>(key, value, parse_double);
        if (v.size() != 4) throw ConfigError("config: omega expects x0,y0,x1,y1");
        for (int i = 0; i < 4; ++i) config.omega[i] = v[i];
      } else if (key == "a11") {
        config.a11 = parse_double(key, value);
      } else if (key == "a12") {
        config.a12 = parse_double(key, value);
      } else if (key == "a22") {
        config.a22 = parse_double(key, value);
      } else if (key == "a0") {
        config.a0 = parse_double(key, value);
      } else if (key == "b") {
        if (value != "zero" && value != "linear" && value != "cubic")
          throw ConfigError("config: unknown nonlinearity '" + value + "'");
        config.b = value;
      } else if (key == "f") {
        if (value != "zero" && value != "one")
          throw ConfigError("config: unknown source '" + value + "'");
        config.f = value;
      } else if (key == "y_d") {
        if (value != "zero" && value != "one")
          throw ConfigError("config: unknown target '" + value + "'");
        config.y_d = value;
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [problem]");
      }
    } else if (section == "mesh") {
      if (key == "n") {
        config.n = as_int(key, value);
      } else if (key == "levels") {
        config.levels = parse_list<int>(key, value, as_int);
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [mesh]");
      }
    } else if (section == "optimizer") {
      if (key == "c_tik") {
        config.c_tik = parse_double(key, value);
      } else if (key == "max_iterations") {
        config.max_iterations = as_int(key, value);
      } else if (key == "tolerance") {
        config.tolerance = parse_double(key, value);
      } else if (key == "armijo_slope") {
        config.armijo_slope = parse_double(key, value);
      } else if (key == "backtrack") {
        config.backtrack = parse_double(key, value);
      } else if (key == "initial") {
        config.initial = parse_double(key, value);
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [optimizer]");
      }
    } else if (section == "analysis") {
      if (key == "structure") {
        config.structure = parse_bool(key, value);
      } else if (key == "soc") {
        config.soc = parse_bool(key, value);
      } else if (key == "no_growth") {
        config.no_growth = parse_bool(key, value);
      } else if (key == "bound") {
        config.bound = parse_bool(key, value);
      } else if (key == "tau_factors") {
        config.tau_factors = parse_list<double>(key, value, parse_double);
      } else if (key == "directions") {
        config.directions = as_int(key, value);
      } else if (key == "growth_samples") {
        config.growth_samples = as_int(key, value);
      } else if (key == "sample_points") {
        config.sample_points = parse_long(key, value);
      } else if (key == "stripes") {
        config.stripes = parse_list<int>(key, value, as_int);
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [analysis]");
      }
    } else if (section == "output") {
      if (key == "directory") {
        config.directory = value;
      } else if (key == "seed") {
        config.seed = static_cast<unsigned>(parse_long(key, value));
      } else if (key == "threads") {
        config.threads = as_int(key, value);
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [output]");
      }
    }
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace bilopt
