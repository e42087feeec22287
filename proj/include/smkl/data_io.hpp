#pragma once

#include <smkl/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace smkl {

// Dense sample matrix, rows are samples. row_ids is optional metadata; the
// text loader leaves it empty.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> row_ids;

  Index n() const { return values.rows(); }
  Index d() const { return values.cols(); }
};

// Per-sample integer labels; -1 marks an unlabeled sample. num_classes is
// 1 + max(label), so class ids are 0-based.
struct LabelVector {
  std::vector<int> labels;
  int num_classes = 0;

  Index n() const { return static_cast<Index>(labels.size()); }
};

// Disjoint index sets partitioning 0..n-1, both sorted ascending.
struct LabelMask {
  std::vector<int> labeled_idx;
  std::vector<int> unlabeled_idx;
};

// Solver hyper-parameters and knobs shared by all fit variants.
struct SolverConfig {
  double alpha = 1.0;          // spectral-embedding pull on the graph
  double beta = 1.0;           // consensus-kernel fidelity weight
  double gamma = 1.0;          // Frobenius regularizer on the graph
  int c = 2;                   // cluster / class count
  int max_iter = 200;
  double rel_tol = 1e-5;       // relative objective-change stopping threshold
  std::uint64_t seed = 0;
  bool adaptive_alpha = true;  // rank-driven doubling/halving of alpha
  int kmeans_restarts = 10;
  double epsilon_w = 1e-12;    // floor on residual norms in the weight update
  double ridge = 1e-8;         // diagonal ridge for the harmonic label solve
};

// Throws Error("domain") when a field is out of range.
void validate(const SolverConfig& cfg);

// 17 significant digits: enough for bit-exact double round-trips through text.
std::string format_g17(double x);

// Delimiter-separated numeric text, one row per line, no header. Errors name
// the offending row/column. Requires n >= 2, d >= 1, all entries finite.
DataMatrix load_dense_matrix(const std::string& path, char delimiter = ',');

// Writes values with %.17g so that load_dense_matrix reproduces them exactly.
void save_dense_matrix(const std::string& path, const Matrix& values,
                       char delimiter = ',');

// One integer per line, exactly n lines, values >= -1, at least one >= 0.
LabelVector load_labels(const std::string& path, Index n);

void save_labels(const std::string& path, const std::vector<int>& labels);

// Deterministic stratified split: every class present in `labels` keeps at
// least one labeled sample, |labeled_idx| = round(fraction*n) up to
// stratification adjustments. Samples already marked -1 are always unlabeled.
LabelMask split_labeled(const LabelVector& labels, double fraction,
                        std::uint64_t seed);

// key=value lines with '#' comments; keys match SolverConfig field names.
// Unknown keys and out-of-range values are errors; absent keys keep defaults.
SolverConfig load_config(const std::string& path);

// Shared helpers for the key=value text formats.
std::string trim_copy(const std::string& s);
std::vector<std::string> read_text_lines(const std::string& path,
                                         const std::string& what);
// Assigns one SolverConfig field by name; returns false for unknown keys,
// throws Error("parse") for malformed values.
bool set_config_field(SolverConfig& cfg, const std::string& key,
                      const std::string& value);

}  // namespace smkl
