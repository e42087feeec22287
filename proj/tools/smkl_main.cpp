// Command-line front end: batch experiments, kernel-bank export, and
// standalone metric evaluation.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <smkl/data_io.hpp>
#include <smkl/evaluation.hpp>
#include <smkl/experiment.hpp>
#include <smkl/kernels.hpp>

namespace {

int count_lines(const std::string& path) {
  return static_cast<int>(smkl::read_text_lines(path, "label file").size());
}

int cmd_run(const std::string& spec_path, const std::string& out_override) {
  smkl::ExperimentSpec spec = smkl::load_experiment_spec(spec_path);
  if (!out_override.empty()) spec.out_dir = out_override;
  return smkl::run_experiment(spec);
}

int cmd_kernels(const std::string& data_path, const std::string& recipe,
                const std::string& out_dir) {
  const smkl::DataMatrix data = smkl::load_dense_matrix(data_path);
  const smkl::KernelBank bank = smkl::build_bank(data.values, recipe);
  smkl::save_bank(bank, out_dir);
  std::cout << "wrote " << bank.size() << " kernels (recipe " << bank.recipe
            << ", n=" << bank.n() << ") to " << out_dir << '\n';
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path) {
  const int n = count_lines(pred_path);
  const smkl::LabelVector pred = smkl::load_labels(pred_path, n);
  const smkl::LabelVector truth = smkl::load_labels(truth_path, n);
  const smkl::MetricReport report = smkl::evaluate(pred.labels, truth.labels);
  std::cout << "acc=" << smkl::format_g17(report.acc) << '\n';
  std::cout << "nmi=" << smkl::format_g17(report.nmi) << '\n';
  std::cout << "confusion=\n" << report.confusion << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Self-weighted multiple kernel learning: graph-based clustering and "
      "semi-supervised label propagation"};
  app.require_subcommand(1);

  std::string spec_path, out_override;
  CLI::App* run = app.add_subcommand(
      "run", "Run the experiment described by a key=value spec file");
  run->add_option("spec", spec_path, "experiment spec file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_override,
                  "override the spec's out_dir for this run");

  std::string data_path, recipe, bank_dir;
  CLI::App* kernels = app.add_subcommand(
      "kernels", "Build a kernel bank from a data matrix and export it");
  kernels->add_option("data", data_path, "dense matrix file (CSV)")
      ->required()
      ->check(CLI::ExistingFile);
  kernels->add_option("recipe", recipe, "clustering12 or ssl7")->required();
  kernels->add_option("out_dir", bank_dir, "output directory")->required();

  std::string pred_path, truth_path;
  CLI::App* eval = app.add_subcommand(
      "eval", "Matched accuracy and NMI between two label files");
  eval->add_option("pred", pred_path, "predicted labels, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("truth", truth_path, "true labels, one per line")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(spec_path, out_override);
    if (kernels->parsed()) return cmd_kernels(data_path, recipe, bank_dir);
    return cmd_eval(pred_path, truth_path);
  } catch (const smkl::Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
