#include <iostream>

#include "CLI11.hpp"
#include "beet/error.hpp"
#include "commands.hpp"

namespace {

using beet::cli::CommonOptions;

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Tool config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output path (file or directory, per command)");
  cmd->add_option("--workers", o.workers, "Worker threads (0: all cores)");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--tier", o.tier, "Patch size tier: small, medium or large");
  cmd->add_option("--margin", o.margin, "Patch crop margin as a fraction of the box size");
  cmd->add_flag("--oracle", o.oracle, "Use ground-truth backends");
  cmd->add_option("--adapter", o.adapter, "External adapter command line");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sugar-beet inspection toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  std::filesystem::path dataset;

  auto* stats = app.add_subcommand("stats", "Per-stage dataset statistics and label distribution");
  bool no_labels = false;
  stats->add_option("dataset", dataset, "Annotation JSON")->required()->check(CLI::ExistingFile);
  stats->add_flag("--no-labels", no_labels, "Skip the per-class pixel distribution");
  add_common(stats, common);

  auto* convert = app.add_subcommand("convert", "Write the one-class instance dataset");
  std::optional<std::filesystem::path> skip_report;
  convert->add_option("dataset", dataset, "Annotation JSON")->required()->check(CLI::ExistingFile);
  convert->add_option("--report", skip_report, "JSON file listing skipped instances and regions");
  add_common(convert, common);

  auto* split = app.add_subcommand("split", "Grouped train/val/test split");
  beet::cli::SplitOptions split_opt;
  split->add_option("dataset", dataset, "Annotation JSON")->required()->check(CLI::ExistingFile);
  split->add_option("--train", split_opt.train, "Train fraction");
  split->add_option("--val", split_opt.val, "Validation fraction");
  split->add_option("--test", split_opt.test, "Test fraction");
  add_common(split, common);

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  beet::cli::EvaluateOptions eval_opt;
  std::string task = "seg";
  evaluate->add_option("predictions", eval_opt.predictions, "Predictions (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--dataset", eval_opt.dataset, "Ground-truth annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--task", task, "seg, det or obb");
  evaluate->add_flag("--per-sample", eval_opt.per_sample, "Average mIoU over images");
  add_common(evaluate, common);

  auto* calibrate = app.add_subcommand("calibrate-mass", "Fit mass per unit area from samples");
  std::filesystem::path samples;
  calibrate->add_option("samples", samples, "CSV with area_mm2,mass_g")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(calibrate, common);

  auto* inspect = app.add_subcommand("inspect", "Two-stage inspection of dataset images");
  beet::cli::InspectOptions inspect_opt;
  inspect->add_option("dataset", inspect_opt.dataset, "Annotation JSON listing the images")
      ->required()
      ->check(CLI::ExistingFile);
  inspect->add_option("--image", inspect_opt.image_ids, "Only these image ids");
  inspect->add_option("--mass-model", inspect_opt.mass_model, "Mass model JSON")
      ->check(CLI::ExistingFile);
  add_common(inspect, common);

  CLI11_PARSE(app, argc, argv);

  beet::cli::Console console{std::cout, std::cerr};
  try {
    if (*stats) {
      beet::cli::cmd_stats(dataset, !no_labels, common, console);
    } else if (*convert) {
      beet::cli::cmd_convert(dataset, skip_report, common, console);
    } else if (*split) {
      beet::cli::cmd_split(dataset, split_opt, common, console);
    } else if (*evaluate) {
      eval_opt.task = beet::cli::parse_eval_task(task);
      beet::cli::cmd_evaluate(eval_opt, common, console);
    } else if (*calibrate) {
      beet::cli::cmd_calibrate_mass(samples, common, console);
    } else if (*inspect) {
      beet::cli::cmd_inspect(inspect_opt, common, console);
    }
  } catch (const beet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
