#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "beet/config.hpp"

namespace beet::cli {

namespace fs = std::filesystem;

/// Flags shared by every subcommand. Unset optionals fall back to the
/// config file, then to built-in defaults.
struct CommonOptions {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> tier;
  std::optional<double> margin;
  bool oracle = false;
  std::optional<std::string> adapter;
};

/// Config file plus flag overrides. Throws ValidationError.
ToolConfig resolve_config(const CommonOptions& common);

/// Where commands print. Warnings go to `err` and are counted but never
/// change the exit code.
struct Console {
  std::ostream& out;
  std::ostream& err;
  int warnings = 0;
  void warn(const std::string& message);
};

// Each command throws beet::Error on failure.

void cmd_stats(const fs::path& dataset, bool label_distribution, const CommonOptions& common,
               Console& console);

void cmd_convert(const fs::path& dataset, const std::optional<fs::path>& skip_report,
                 const CommonOptions& common, Console& console);

struct SplitOptions {
  std::optional<double> train;
  std::optional<double> val;
  std::optional<double> test;
};
void cmd_split(const fs::path& dataset, const SplitOptions& split, const CommonOptions& common,
               Console& console);

enum class EvalTask { Seg, Det, Obb };
EvalTask parse_eval_task(const std::string& name);

struct EvaluateOptions {
  fs::path predictions;  // JSON lines
  fs::path dataset;
  EvalTask task = EvalTask::Seg;
  bool per_sample = false;
};
void cmd_evaluate(const EvaluateOptions& options, const CommonOptions& common, Console& console);

void cmd_calibrate_mass(const fs::path& samples, const CommonOptions& common, Console& console);

struct InspectOptions {
  fs::path dataset;
  std::vector<std::string> image_ids;  // empty: all images
  std::optional<fs::path> mass_model;
};
void cmd_inspect(const InspectOptions& options, const CommonOptions& common, Console& console);

/// File-name-safe form of an image id.
std::string file_stem(const std::string& image_id);

}  // namespace beet::cli
