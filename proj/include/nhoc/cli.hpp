#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "nhoc/error.hpp"
#include "nhoc/trajectory.hpp"

namespace nhoc::cli {

enum ExitCode : int {
  kOk = 0,
  kInvariantFailure = 1,
  kConfigError = 2,
  kNumericalError = 3,
  kNoConvergence = 4,
};

/// Maps a library error to the process exit code.
int exit_code_for(ErrorKind kind);

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// CSV with header t, q_i, y_i, pq_i, py_i, u_i, energy, hamiltonian; empty
/// blocks are left out. Values are printed with 17 significant digits.
void write_csv(const Trajectory& traj, std::ostream& os);

Vec parse_vector(const std::string& text, const char* option);

}  // namespace nhoc::cli
