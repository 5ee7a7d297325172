#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "wmr/classic_controller.hpp"
#include "wmr/it2_fuzzy.hpp"
#include "wmr/lmi_synthesis.hpp"
#include "wmr/path_model.hpp"
#include "wmr/sim_harness.hpp"

namespace wmr {

struct FuzzyConfig {
  ErrorBox box;
  bool clamp = true;
};

struct SimSettings {
  double dt = 1e-3;
  double horizon = 10.0;
  TrackingError e0{-0.1, -0.1, deg_to_rad(-6.0)};
  // Previously written synthesis to reuse instead of solving again.
  std::optional<std::filesystem::path> synthesis;
};

/// Everything a run needs. Defaults give the U-turn scenario from the start
/// pose (0.4, 0.7, -90 deg) to (1.5, 0.7, -90 deg).
struct RunConfig {
  PathSpec path{{0.4, 0.7, -kPi / 2.0}, {1.5, 0.7, -kPi / 2.0}, 1.0, 1.0, 1.0};
  std::size_t samples = 2001;
  ControllerKind controller = ControllerKind::kType1;
  ClassicParams classic;
  FuzzyConfig fuzzy;
  UncertaintyGrid type2;
  SolverSettings solver;
  SimSettings sim;
  std::filesystem::path output_dir = "out";

  void validate() const;
};

/// INI document with sections path, controller, classic, fuzzy, type2, solver,
/// sim and output. Unknown sections or keys are rejected. Angles take a `deg`
/// or `rad` suffix; a bare number is radians. Relative paths resolve against
/// `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);

/// Parses "12.5", "-90deg", "1.2 rad".
double parse_angle(const std::string& text);

/// Uncertainty presets: "wide" (x in [0.7, 1.5], y in [0.5, 0.9]) and
/// "narrow" (x in [0.8, 1.1], y in [0.6, 0.8]).
UncertaintyGrid uncertainty_preset(const std::string& name);

}  // namespace wmr
