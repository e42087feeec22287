#pragma once

#include <string>
#include <vector>

#include <smkl/data_io.hpp>

namespace smkl {

// A batch run loaded from a key=value spec file (dotted keys select nested
// fields: solver.alpha=0.5, sweep.gamma=0.1,1,10).
struct ExperimentSpec {
  std::string data_path;
  std::string labels_path;
  std::string mode = "clustering";  // clustering | ssl
  std::string method = "smkl";      // smkl | kgl | pmkl
  std::string recipe;               // clustering12 | ssl7; empty = by mode
  int kernel_index = -1;            // kgl: fixed bank member
  bool kernel_best = false;         // kgl: sweep every bank member
  double label_fraction = 0.1;      // ssl only
  int repeats = 1;                  // ssl only
  std::vector<double> sweep_alpha;  // empty = single point at solver.alpha
  std::vector<double> sweep_beta;
  std::vector<double> sweep_gamma;
  SolverConfig solver;
  bool solver_c_set = false;  // explicit solver.c overrides the label count
  std::string out_dir = ".";
  int workers = 1;
  bool dump_matrices = false;
};

ExperimentSpec load_experiment_spec(const std::string& path);

// Structural checks (field domains and cross-field requirements); file
// existence is checked by the run itself.
void validate(const ExperimentSpec& spec);

// One grid point's outcome. A failed point carries its error kind and empty
// metrics; sibling points are unaffected.
struct PointResult {
  int point = 0;
  std::string method;
  std::string mode;
  std::string kernel = "-";  // bank member name for single-kernel points
  double alpha = 0, beta = 0, gamma = 0;
  double acc = 0, nmi = 0, stddev = 0;  // ssl: mean acc/nmi and acc stddev
  double iterations = 0;                // ssl: mean over repeats
  bool converged = false;               // ssl: true when every repeat converged
  bool best = false;
  bool failed = false;
  std::string error;               // error kind when failed
  std::vector<int> labels;         // representative prediction (ssl: first repeat)
};

// Long-format sweep table (header + one row per point), CSV with quoting.
void emit_sweep_table(std::ostream& out, const std::vector<PointResult>& results);

// Runs every grid point (in parallel up to spec.workers), writes report.txt,
// report.csv, labels.txt, fit.txt and optional S.csv/K.csv under
// spec.out_dir. Returns 0 when every point succeeded, 2 when some failed.
// Spec/input problems (unreadable data, bad bank) throw instead.
int run_experiment(const ExperimentSpec& spec);

}  // namespace smkl
