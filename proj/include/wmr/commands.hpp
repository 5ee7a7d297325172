#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>

#include "wmr/config.hpp"
#include "wmr/error.hpp"
#include "wmr/it2_fuzzy.hpp"
#include "wmr/lmi_synthesis.hpp"
#include "wmr/sim_harness.hpp"

namespace wmr {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitInvalidPath = 3,
  kExitDegenerateZoning = 4,
  kExitInfeasible = 5,
  kExitDivergence = 6,
  kExitIllConditioned = 7,
};

int exit_code(ErrorCode code);

/// Where a command reports: `out` gets the human summary, `log` warnings and
/// verbose detail.
struct CommandIo {
  std::ostream& out;
  std::ostream& log;
  bool verbose = false;
};

/// Writes through a temporary sibling file and renames it into place.
void write_atomic(const std::filesystem::path& file, const std::function<void(std::ostream&)>& body);

ReferenceTrajectory build_reference(const RunConfig& config);

/// Zoning, rules, LMI problem and certified gains for one fuzzy controller kind.
struct FuzzyDesign {
  ControllerKind kind = ControllerKind::kType1;
  TsModel model;
  std::optional<IntervalBounds> interval;  // type2 only
  std::optional<LmiProblem> problem;
  PdcSynthesis synthesis;
};

/// One synthesis on the nominal path's rules serves both fuzzy kinds; type2
/// additionally gets the envelopes of the uncertainty grid.
/// Throws kInfeasible when no certificate is found.
FuzzyDesign design_fuzzy(const RunConfig& config, const ReferenceTrajectory& traj,
                         ControllerKind kind);

/// Controller for `kind`; fuzzy gains come from config.sim.synthesis when set,
/// otherwise they are synthesized.
std::unique_ptr<TrackingController> make_controller(const RunConfig& config,
                                                    const ReferenceTrajectory& traj,
                                                    ControllerKind kind, const CommandIo& io);

// Each returns the process exit code; hard errors propagate as wmr::Error.
int cmd_path(const RunConfig& config, const CommandIo& io);
int cmd_synth(const RunConfig& config, const CommandIo& io);
int cmd_simulate(const RunConfig& config, const CommandIo& io);
int cmd_compare(const RunConfig& config, const CommandIo& io);

}  // namespace wmr
