#include "wmr/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wmr/error.hpp"

namespace wmr {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"path",
       {"start_x", "start_y", "start_theta", "end_x", "end_y", "end_theta", "depart_distance",
        "approach_distance", "duration", "samples"}},
      {"controller", {"kind"}},
      {"classic", {"zeta", "g"}},
      {"fuzzy", {"box_ex", "box_ey", "box_etheta", "clamp"}},
      {"type2", {"preset", "x_lo", "x_hi", "y_lo", "y_hi", "n"}},
      {"solver", {"tol_feas", "max_iter", "gain_bound"}},
      {"sim", {"dt", "horizon", "e0_x", "e0_y", "e0_theta", "synthesis"}},
      {"output", {"dir"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, key + ": expected a number, got '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kConfig, key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v)) throw Error(ErrorCode::kConfig, key + ": expected an integer");
  return static_cast<long>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw Error(ErrorCode::kConfig, key + ": expected a boolean, got '" + text + "'");
}

// Drops a trailing "; ..." or "# ..." comment that follows whitespace.
std::string strip_comment(const std::string& value) {
  for (std::size_t k = 1; k < value.size(); ++k) {
    if ((value[k] == ';' || value[k] == '#') &&
        std::isspace(static_cast<unsigned char>(value[k - 1]))) {
      return trim(value.substr(0, k));
    }
  }
  return value;
}

// Reads the optional key `section.name` into `out` through `conv`.
template <typename T, typename Conv>
void read(const pt::ptree& tree, const std::string& section, const std::string& name, T& out,
          Conv conv) {
  const auto sec = tree.get_child_optional(section);
  if (!sec) return;
  const auto value = sec->get_optional<std::string>(name);
  if (!value) return;
  out = conv(section + "." + name, strip_comment(*value));
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string t = trim(text);
  double scale = 1.0;
  const auto ends_with = [&](const std::string& suffix) {
    return t.size() >= suffix.size() && t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("deg")) {
    scale = kPi / 180.0;
    t = trim(t.substr(0, t.size() - 3));
  } else if (ends_with("rad")) {
    t = trim(t.substr(0, t.size() - 3));
  }
  return parse_number("angle", t) * scale;
}

UncertaintyGrid uncertainty_preset(const std::string& name) {
  UncertaintyGrid g;
  if (name == "wide") {
    g.x = {0.7, 1.5};
    g.y = {0.5, 0.9};
  } else if (name == "narrow") {
    g.x = {0.8, 1.1};
    g.y = {0.6, 0.8};
  } else {
    throw Error(ErrorCode::kConfig, "type2.preset: unknown preset '" + name + "'");
  }
  return g;
}

void RunConfig::validate() const {
  if (samples < 2) throw Error(ErrorCode::kConfig, "path.samples must be at least 2");
  classic.validate();
  if (!(fuzzy.box.ex > 0.0) || !(fuzzy.box.ey > 0.0) || !(fuzzy.box.etheta > 0.0)) {
    throw Error(ErrorCode::kConfig, "fuzzy box half-widths must be positive");
  }
  if (fuzzy.box.etheta >= kPi) {
    throw Error(ErrorCode::kConfig, "fuzzy.box_etheta must be below pi (sinc must stay positive)");
  }
  type2.validate();
  if (!(solver.tol_feas > 0.0)) throw Error(ErrorCode::kConfig, "solver.tol_feas must be positive");
  if (solver.max_iter < 1) throw Error(ErrorCode::kConfig, "solver.max_iter must be positive");
  if (!(solver.gain_bound > 0.0)) throw Error(ErrorCode::kConfig, "solver.gain_bound must be positive");
  if (!(sim.dt > 0.0)) throw Error(ErrorCode::kConfig, "sim.dt must be positive");
  if (!(sim.horizon >= path.duration)) {
    throw Error(ErrorCode::kConfig, "sim.horizon must cover the path duration");
  }
  if (!sim.e0.vec().allFinite()) throw Error(ErrorCode::kConfig, "sim.e0 must be finite");
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config parse error: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      throw Error(ErrorCode::kConfig, "unknown config section [" + section + "]");
    }
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorCode::kConfig, "key '" + section + "' must be inside a section");
    }
    for (const auto& kv : body) {
      if (!it->second.count(kv.first)) {
        throw Error(ErrorCode::kConfig, "unknown config key " + section + "." + kv.first);
      }
    }
  }

  const auto num = [](const std::string& k, const std::string& v) { return parse_number(k, v); };
  const auto angle = [](const std::string& k, const std::string& v) {
    try {
      return parse_angle(v);
    } catch (const Error&) {
      throw Error(ErrorCode::kConfig, k + ": expected an angle, got '" + v + "'");
    }
  };
  const auto text = [](const std::string&, const std::string& v) { return trim(v); };

  RunConfig c;
  read(tree, "path", "start_x", c.path.start.x, num);
  read(tree, "path", "start_y", c.path.start.y, num);
  read(tree, "path", "start_theta", c.path.start.theta, angle);
  read(tree, "path", "end_x", c.path.end.x, num);
  read(tree, "path", "end_y", c.path.end.y, num);
  read(tree, "path", "end_theta", c.path.end.theta, angle);
  read(tree, "path", "depart_distance", c.path.depart_distance, num);
  read(tree, "path", "approach_distance", c.path.approach_distance, num);
  read(tree, "path", "duration", c.path.duration, num);
  long samples = static_cast<long>(c.samples);
  read(tree, "path", "samples", samples, parse_integer);
  if (samples < 2) throw Error(ErrorCode::kConfig, "path.samples must be at least 2");
  c.samples = static_cast<std::size_t>(samples);

  std::string kind = to_string(c.controller);
  read(tree, "controller", "kind", kind, text);
  c.controller = parse_controller_kind(kind);

  read(tree, "classic", "zeta", c.classic.zeta, num);
  read(tree, "classic", "g", c.classic.g, num);

  read(tree, "fuzzy", "box_ex", c.fuzzy.box.ex, num);
  read(tree, "fuzzy", "box_ey", c.fuzzy.box.ey, num);
  read(tree, "fuzzy", "box_etheta", c.fuzzy.box.etheta, angle);
  read(tree, "fuzzy", "clamp", c.fuzzy.clamp, parse_bool);

  std::string preset = "wide";
  read(tree, "type2", "preset", preset, text);
  c.type2 = uncertainty_preset(preset);
  read(tree, "type2", "x_lo", c.type2.x.lo, num);
  read(tree, "type2", "x_hi", c.type2.x.hi, num);
  read(tree, "type2", "y_lo", c.type2.y.lo, num);
  read(tree, "type2", "y_hi", c.type2.y.hi, num);
  long n = c.type2.n;
  read(tree, "type2", "n", n, parse_integer);
  if (n < 1 || n > 1000) throw Error(ErrorCode::kConfig, "type2.n must be in [1, 1000]");
  c.type2.n = static_cast<int>(n);

  read(tree, "solver", "tol_feas", c.solver.tol_feas, num);
  long max_iter = c.solver.max_iter;
  read(tree, "solver", "max_iter", max_iter, parse_integer);
  if (max_iter < 1 || max_iter > 1000000) {
    throw Error(ErrorCode::kConfig, "solver.max_iter must be in [1, 1e6]");
  }
  c.solver.max_iter = static_cast<int>(max_iter);
  read(tree, "solver", "gain_bound", c.solver.gain_bound, num);

  read(tree, "sim", "dt", c.sim.dt, num);
  read(tree, "sim", "horizon", c.sim.horizon, num);
  read(tree, "sim", "e0_x", c.sim.e0.ex, num);
  read(tree, "sim", "e0_y", c.sim.e0.ey, num);
  read(tree, "sim", "e0_theta", c.sim.e0.etheta, angle);
  std::string synthesis;
  read(tree, "sim", "synthesis", synthesis, text);
  if (!synthesis.empty()) c.sim.synthesis = base_dir / synthesis;

  std::string out_dir;
  read(tree, "output", "dir", out_dir, text);
  if (!out_dir.empty()) c.output_dir = base_dir / out_dir;

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config file " + file.string());
  return parse_config(in, file.parent_path());
}

}  // namespace wmr
