#pragma once

// End-to-end experiment commands behind the `chromacs` executable. Each command
// reads everything it needs from a Config and returns a process exit code.

#include <iosfwd>
#include <string>
#include <string_view>

#include "chromacs/config.hpp"
#include "chromacs/errors.hpp"
#include "chromacs/optics.hpp"
#include "chromacs/solver.hpp"
#include "chromacs/transforms.hpp"

namespace chromacs::pipeline {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kNumericalError = 4,
};

ExitCode exit_code_for(Errc code) noexcept;

/// Every key any command understands (dotted names).
std::span<const std::string_view> known_keys();

OpticalPrescription prescription_from(const Config& cfg);
SolverConfig solver_config_from(const Config& cfg);
/// `levels` = 0 or absent picks default_levels for the given shape.
TransformSpec transform_spec_from(const Config& cfg, std::size_t ny, std::size_t nx);
/// Geometry of paths.cube when set, otherwise geometry.* keys.
CubeGeometry geometry_from(const Config& cfg);

int cmd_scene(const Config& cfg, std::ostream& log);
int cmd_psf(const Config& cfg, std::ostream& log);
int cmd_mask(const Config& cfg, std::ostream& log);
int cmd_simulate(const Config& cfg, std::ostream& log);
int cmd_reconstruct(const Config& cfg, std::ostream& log);
int cmd_oracle(const Config& cfg, std::ostream& log);
int cmd_metrics(const Config& cfg, std::ostream& log);
int cmd_render(const Config& cfg, std::ostream& log);

/// Dispatches by name; maps chromacs::Error to exit codes and prints the message.
int run_command(std::string_view name, const Config& cfg, std::ostream& log, std::ostream& err);

} // namespace chromacs::pipeline
