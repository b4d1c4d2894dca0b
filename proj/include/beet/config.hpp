#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "beet/dataset.hpp"
#include "beet/geometry.hpp"
#include "beet/metrics.hpp"
#include "beet/patch.hpp"
#include "beet/pipeline.hpp"

namespace beet {

/// Settings shared by the command-line tools. JSON form:
///
///   {"markers": {"Ruler": {"length_mm": 300, "width_mm": 30}, "Sign": {...}},
///    "tier": "large", "margin_frac": 0.05, "residual_bound": 0.05,
///    "adapter": {"command": "...", "timeout_s": 60},
///    "split": {"train": 0.7, "val": 0.15, "test": 0.15, "seed": 0},
///    "dice_epsilon": 1e-6, "workers": 0}
///
/// Every key is optional; unknown keys are rejected. Marker sizes have no
/// defaults: without them no scale (and no mass) is reported.
struct ToolConfig {
  std::array<std::optional<PhysicalSize>, 2> marker_sizes{};
  PatchTier tier = PatchTier::Large;
  double margin_frac = kDefaultMarginFrac;
  double residual_bound = 0.05;
  std::string adapter_command;
  std::chrono::milliseconds adapter_timeout{60'000};
  SplitRatios split;
  std::uint64_t seed = 0;
  double dice_epsilon = kDefaultDiceEpsilon;
  int workers = 0;  // 0: one per hardware thread

  InspectConfig inspect_config() const;
};

/// Throws ParseError / ValidationError.
ToolConfig parse_tool_config(std::string_view json_text);
ToolConfig load_tool_config(const std::filesystem::path& path);
std::string tool_config_to_json(const ToolConfig& config);

}  // namespace beet
