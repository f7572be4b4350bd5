#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>

#include "cli/panel.hpp"
#include "ordlatent/baselines.hpp"
#include "ordlatent/estimator.hpp"

namespace ordlatent::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitParse = 3,
  kExitConvergence = 4,
  kExitUnidentified = 5,
  kExitIo = 6,
  kExitNumerical = 7,
};

int exit_code_for(const std::exception& e);

struct FitArgs {
  std::string input;
  PanelOptions panel;
  std::uint64_t seed = kDefaultSeed;
  int bootstrap = 0;
  int threads = 0;
  std::string output;  // stdout when empty
  std::string scores_out;
  bool fisher_mean_correction = true;
};

struct SimulateArgs {
  std::string scenario = "S1";
  double rho = 0.5;
  int n = 30;
  std::uint64_t seed = kDefaultSeed;
  std::string output;
};

struct McArgs {
  std::string scenario = "S1";
  double rho = 0.5;
  int n = 30;
  int reps = 500;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;
  std::string out_dir;
};

struct BaselinesArgs {
  std::string input;
  PanelOptions panel;
  bool table = false;  // input is a contingency table rather than a panel
  std::string output;
};

void cmd_fit(const FitArgs& args, std::ostream& out);
void cmd_simulate(const SimulateArgs& args, std::ostream& out);
void cmd_mc(const McArgs& args, std::ostream& out);
void cmd_baselines(const BaselinesArgs& args, std::ostream& out);

/// Contingency table CSV: a header row, then one row per category of the
/// first variable with a leading row label followed by the counts.
ContingencyTable parse_table(std::istream& in, const std::string& source);

/// Writes content to path, or to out when path is empty.
void write_output(const std::string& path, const std::string& content, std::ostream& out);

}  // namespace ordlatent::cli
