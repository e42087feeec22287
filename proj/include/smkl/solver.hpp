#pragma once

#include <smkl/data_io.hpp>
#include <smkl/kernels.hpp>
#include <smkl/numerics.hpp>

#include <iosfwd>
#include <vector>

namespace smkl {

// Learned similarity graph: raw nonnegative S, symmetrized affinity
// W = (S + S^T)/2, and Laplacian L = diag(W 1) - W.
struct AffinityGraph {
  Matrix S, W, L;
};

// Builds W and L from a square nonnegative S.
AffinityGraph make_affinity(Matrix s);

// Squared row distances of the embedding/label matrix P: the linear pull each
// sample's spectral neighborhood exerts on its graph column.
Matrix indicator_sq_dists(const Matrix& p);

// Unconstrained closed-form solve of all graph columns against one shared
// Cholesky factorization of gamma*I + K, with escalating diagonal ridge when
// the factorization fails. Columns are independent given the factorization.
Matrix update_s_columns(const Matrix& k, const Matrix& g, double alpha,
                        double gamma);

// Same solve with negatives clamped to zero and W/L rebuilt.
AffinityGraph update_S(const Matrix& k, const Matrix& g, double alpha,
                       double gamma);

// Closed-form consensus-kernel update (stationary point of the weighted
// fidelity plus graph-fit terms), symmetrized.
Matrix update_K(const AffinityGraph& graph, const KernelBank& bank,
                const Vector& w, double beta);

// Inverse-residual weights w_i = 1 / (2 * max(||H_i - K||_F, epsilon_w)).
Vector update_w(const KernelBank& bank, const Matrix& k, double epsilon_w);

// c smallest Laplacian eigenvectors, orthonormal columns.
Matrix update_P_clustering(const Matrix& laplacian, int c);

// Harmonic propagation: labeled rows pinned to y_l (one row per
// mask.labeled_idx entry, in order), unlabeled rows solve
// (L_uu + ridge*I) P_u = -L_ul Y_l, ridge escalating on failure.
Matrix update_P_ssl(const Matrix& laplacian, const Matrix& y_l,
                    const LabelMask& mask, double ridge);

// Row-wise argmax; ties go to the lowest class index.
std::vector<int> decide_labels(const Matrix& p);

// Graph-fit part shared by all variants:
//   Tr(K - 2KS + S^T K S) + gamma ||S||_F^2 + alpha Tr(P^T L P),
// with L rebuilt from S.
double graph_objective(const Matrix& s, const Matrix& k, const Matrix& p,
                       double alpha, double gamma);

// Full multiple-kernel objective: graph_objective plus
// beta * sum_i w_i ||H_i - K||_F^2.
double objective(const Matrix& s, const Matrix& k, const Matrix& p,
                 const Vector& w, const KernelBank& bank, double alpha,
                 double beta, double gamma);

// Closed-form parameterized-consensus weights theta_i minimizing
// sum_i theta_i f_i under sum_i sqrt(theta_i) = 1, theta >= 0, where
// f_i = Tr(H_i - 2 H_i S + S^T H_i S) (clamped below at 1e-12).
Vector pmkl_update_theta(const KernelBank& bank, const AffinityGraph& graph);

enum class FitMode { clustering, ssl };

struct FitResult {
  Matrix S, K, P;
  Vector weights;  // kernel weights (theta for the parameterized consensus);
                   // empty for single-kernel fits
  std::vector<int> labels;
  std::vector<double> objective_trace;  // one entry per completed iteration
  int iterations = 0;
  bool converged = false;
  double alpha_final = 0;
  FitMode mode = FitMode::clustering;
};

// Self-weighted consensus over the whole bank; labels from the graph's
// connected components when they number exactly c, else k-means on the
// row-normalized embedding.
FitResult fit_clustering(const KernelBank& bank, const SolverConfig& cfg);

// Same loop with the harmonic label step in place of the eigen step; the
// class count comes from y.num_classes and only labels at mask.labeled_idx
// are consumed.
FitResult fit_ssl(const KernelBank& bank, const LabelVector& y,
                  const LabelMask& mask, const SolverConfig& cfg);

// Single fixed kernel: graph and embedding updates only.
FitResult fit_kgl(const KernelMatrix& kernel, const SolverConfig& cfg);

// Parameterized consensus K = sum_i theta_i H_i with closed-form theta.
FitResult fit_pmkl(const KernelBank& bank, const SolverConfig& cfg);

// key=value serialization of the scalar fields, weights, labels, and trace.
void write_fit_result(std::ostream& out, const FitResult& result);

// One-hot matrix of the labeled rows, in mask order (shared by fit_ssl,
// the experiment runner, and tests).
Matrix one_hot_rows(const LabelVector& y, const std::vector<int>& labeled_idx,
                    int c);

}  // namespace smkl
