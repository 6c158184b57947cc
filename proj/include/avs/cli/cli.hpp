#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace avs::cli {

/// 0 success, 1 usage error, 2 runtime failure.
struct CommandResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs one subcommand: synth-data, stft, train-avsnet, train-relative, infer,
/// scale, eval, saliency or report. `args` excludes the program name.
/// AVS_PRECISION (f32 default, f64) selects the scalar type.
CommandResult run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Bar chart of one metric across labelled rows, as standalone SVG text.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

}  // namespace avs::cli
