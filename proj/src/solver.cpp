#include <smkl/solver.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <utility>

namespace smkl {

AffinityGraph make_affinity(Matrix s) {
  if (s.rows() != s.cols())
    throw Error("domain", "make_affinity: S must be square");
  if (s.size() == 0) throw Error("domain", "make_affinity: S is empty");
  if (s.minCoeff() < 0)
    throw Error("domain", "make_affinity: S has negative entries");
  AffinityGraph g;
  g.S = std::move(s);
  g.W = (g.S + g.S.transpose()) / 2.0;
  g.L = Matrix(Vector(g.W.rowwise().sum()).asDiagonal()) - g.W;
  return g;
}

Matrix indicator_sq_dists(const Matrix& p) {
  return pairwise_sq_dists(p).d2;
}

Matrix update_s_columns(const Matrix& k, const Matrix& g, double alpha,
                        double gamma) {
  if (k.rows() != k.cols())
    throw Error("domain", "update_s_columns: K must be square");
  if (g.rows() != k.rows() || g.cols() != k.cols())
    throw Error("domain", "update_s_columns: G must match K's shape");
  if (!(gamma > 0))
    throw Error("domain", "update_s_columns: gamma must be positive");
  if (!(alpha >= 0))
    throw Error("domain", "update_s_columns: alpha must be >= 0");
  const Index n = k.rows();
  const Matrix a =
      gamma * Matrix::Identity(n, n) + (k + k.transpose()) / 2.0;
  const Matrix rhs = k.transpose() - (alpha / 4.0) * g;
  // One factorization shared by every column. The system matrix is only
  // required to be invertible, not definite: the consensus-kernel update can
  // leave gamma*I+K indefinite, in which case the Cholesky fast path gives
  // way to a pivoted LU solve. A diagonal ridge escalates when even that
  // stays numerically singular.
  const double base = 1e-6 * a.norm();
  const double rhs_scale = 1.0 + rhs.array().abs().maxCoeff();
  for (double scale : {0.0, 1.0, 10.0, 100.0}) {
    const Matrix shifted =
        scale == 0.0 ? a : Matrix(a + (scale * base) * Matrix::Identity(n, n));
    try {
      return SpdSolver<double>(shifted).solve(rhs);
    } catch (const Error& e) {
      if (e.kind() != std::string("not-positive-definite")) throw;
    }
    const Eigen::PartialPivLU<Matrix> lu(shifted);
    const Matrix x = lu.solve(rhs);
    if ((shifted * x - rhs).array().abs().maxCoeff() <= 1e-8 * rhs_scale)
      return x;
  }
  throw Error("ill-conditioned-kernel",
              "update_s_columns: factorization failed after ridge escalation");
}

AffinityGraph update_S(const Matrix& k, const Matrix& g, double alpha,
                       double gamma) {
  return make_affinity(
      update_s_columns(k, g, alpha, gamma).cwiseMax(0.0));
}

Matrix update_K(const AffinityGraph& graph, const KernelBank& bank,
                const Vector& w, double beta) {
  const Index n = graph.S.rows();
  if (bank.size() == 0) throw Error("domain", "update_K: empty kernel bank");
  if (bank.n() != n)
    throw Error("domain", "update_K: bank and graph sizes differ");
  if (w.size() != bank.size())
    throw Error("domain", "update_K: weight count must match bank size");
  if (w.minCoeff() <= 0)
    throw Error("domain", "update_K: weights must be positive");
  if (!(beta > 0)) throw Error("domain", "update_K: beta must be positive");
  Matrix weighted = Matrix::Zero(n, n);
  for (int i = 0; i < bank.size(); ++i)
    weighted += w(i) * bank.kernels[i].values;
  const Matrix& s = graph.S;
  const Matrix k =
      (2.0 * s.transpose() - s * s.transpose() - Matrix::Identity(n, n) +
       2.0 * beta * weighted) /
      (2.0 * beta * w.sum());
  return (k + k.transpose()) / 2.0;
}

Vector update_w(const KernelBank& bank, const Matrix& k, double epsilon_w) {
  if (bank.size() == 0) throw Error("domain", "update_w: empty kernel bank");
  if (k.rows() != bank.n() || k.cols() != bank.n())
    throw Error("domain", "update_w: K must match the bank size");
  if (!(epsilon_w > 0))
    throw Error("domain", "update_w: epsilon_w must be positive");
  Vector w(bank.size());
  for (int i = 0; i < bank.size(); ++i) {
    const double res = (bank.kernels[i].values - k).norm();
    w(i) = 1.0 / (2.0 * std::max(res, epsilon_w));
  }
  return w;
}

Matrix update_P_clustering(const Matrix& laplacian, int c) {
  return smallest_eigenpairs(laplacian, c).vectors;
}

namespace {

void check_mask(const LabelMask& mask, Index n, const char* who) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  auto visit = [&](const std::vector<int>& idx) {
    for (int i : idx) {
      if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
        throw Error("domain", std::string(who) +
                                  ": mask is not a partition of 0..n-1");
      seen[static_cast<std::size_t>(i)] = 1;
    }
  };
  visit(mask.labeled_idx);
  visit(mask.unlabeled_idx);
  if (mask.labeled_idx.size() + mask.unlabeled_idx.size() !=
      static_cast<std::size_t>(n))
    throw Error("domain",
                std::string(who) + ": mask does not cover every sample");
}

}  // namespace

Matrix update_P_ssl(const Matrix& laplacian, const Matrix& y_l,
                    const LabelMask& mask, double ridge) {
  if (laplacian.rows() != laplacian.cols())
    throw Error("domain", "update_P_ssl: Laplacian must be square");
  const Index n = laplacian.rows();
  check_mask(mask, n, "update_P_ssl");
  const Index l = static_cast<Index>(mask.labeled_idx.size());
  const Index u = static_cast<Index>(mask.unlabeled_idx.size());
  if (l == 0) throw Error("domain", "update_P_ssl: no labeled samples");
  if (y_l.rows() != l)
    throw Error("domain", "update_P_ssl: one y_l row per labeled sample");
  if (!(ridge > 0))
    throw Error("domain", "update_P_ssl: ridge must be positive");
  const Index c = y_l.cols();

  Matrix p(n, c);
  for (Index t = 0; t < l; ++t) p.row(mask.labeled_idx[t]) = y_l.row(t);
  if (u == 0) return p;

  Matrix luu(u, u), lul(u, l);
  for (Index i = 0; i < u; ++i) {
    for (Index j = 0; j < u; ++j)
      luu(i, j) = laplacian(mask.unlabeled_idx[i], mask.unlabeled_idx[j]);
    for (Index j = 0; j < l; ++j)
      lul(i, j) = laplacian(mask.unlabeled_idx[i], mask.labeled_idx[j]);
  }
  const Matrix rhs = -(lul * y_l);
  for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
    try {
      const SpdSolver<double> solver(
          Matrix(luu + (scale * ridge) * Matrix::Identity(u, u)));
      const Matrix pu = solver.solve(rhs);
      for (Index i = 0; i < u; ++i) p.row(mask.unlabeled_idx[i]) = pu.row(i);
      return p;
    } catch (const Error& e) {
      if (e.kind() != std::string("not-positive-definite")) throw;
    }
  }
  throw Error("disconnected-unlabeled-block",
              "update_P_ssl: harmonic system stayed singular after ridge "
              "escalation");
}

std::vector<int> decide_labels(const Matrix& p) {
  if (p.size() == 0) throw Error("domain", "decide_labels: empty matrix");
  std::vector<int> labels(static_cast<std::size_t>(p.rows()));
  for (Index i = 0; i < p.rows(); ++i) {
    int best = 0;
    for (Index j = 1; j < p.cols(); ++j)
      if (p(i, j) > p(i, best)) best = static_cast<int>(j);
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

double graph_objective(const Matrix& s, const Matrix& k, const Matrix& p,
                       double alpha, double gamma) {
  if (s.rows() != s.cols() || k.rows() != k.cols() || s.rows() != k.rows())
    throw Error("domain", "graph_objective: S and K must be square and match");
  if (p.rows() != s.rows())
    throw Error("domain", "graph_objective: P must have one row per sample");
  const AffinityGraph g = make_affinity(s);
  const double fit = k.trace() - 2.0 * k.cwiseProduct(s.transpose()).sum() +
                     s.cwiseProduct(k * s).sum();
  const double reg = gamma * s.squaredNorm();
  const double spectral = alpha * p.cwiseProduct(g.L * p).sum();
  return fit + reg + spectral;
}

double objective(const Matrix& s, const Matrix& k, const Matrix& p,
                 const Vector& w, const KernelBank& bank, double alpha,
                 double beta, double gamma) {
  if (w.size() != bank.size())
    throw Error("domain", "objective: weight count must match bank size");
  double fidelity = 0;
  for (int i = 0; i < bank.size(); ++i)
    fidelity += w(i) * (bank.kernels[i].values - k).squaredNorm();
  return graph_objective(s, k, p, alpha, gamma) + beta * fidelity;
}

Vector pmkl_update_theta(const KernelBank& bank, const AffinityGraph& graph) {
  const int r = bank.size();
  if (r == 0) throw Error("domain", "pmkl_update_theta: empty kernel bank");
  if (bank.n() != graph.S.rows())
    throw Error("domain", "pmkl_update_theta: bank and graph sizes differ");
  const Matrix& s = graph.S;
  Vector f(r);
  for (int i = 0; i < r; ++i) {
    const Matrix& h = bank.kernels[i].values;
    f(i) = h.trace() - 2.0 * h.cwiseProduct(s.transpose()).sum() +
           s.cwiseProduct(h * s).sum();
  }
  if ((f.array() <= 0).all())
    throw Error("degenerate-objective",
                "pmkl_update_theta: every kernel residual is non-positive");
  const Vector inv = f.cwiseMax(1e-12).cwiseInverse();
  const double denom = inv.sum();
  return (inv.array() / denom).square().matrix();
}

// ---- fit drivers ------------------------------------------------------

namespace {

Matrix random_affinity_init(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix s(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) s(i, j) = unif(rng);
  for (Index j = 0; j < n; ++j) {
    const double sum = s.col(j).sum();
    if (sum > 0) s.col(j) /= sum;
  }
  return s;
}

void check_bank(const KernelBank& bank, const char* who) {
  if (bank.size() == 0)
    throw Error("domain", std::string(who) + ": empty kernel bank");
  const Index n = bank.n();
  if (n < 2) throw Error("domain", std::string(who) + ": bank needs n >= 2");
  for (const auto& member : bank.kernels)
    if (member.values.rows() != n || member.values.cols() != n)
      throw Error("domain",
                  std::string(who) + ": bank members must be square and equal-sized");
}

Matrix bank_average(const KernelBank& bank) {
  Matrix k = Matrix::Zero(bank.n(), bank.n());
  for (const auto& member : bank.kernels) k += member.values;
  return k / static_cast<double>(bank.size());
}

int count_near_zero(const Vector& evals, double lnorm) {
  const double tol = 1e-8 * lnorm;
  int count = 0;
  for (Index i = 0; i < evals.size(); ++i)
    if (evals(i) < tol) ++count;
  return count;
}

// Rank-driven schedule: too few near-zero Laplacian eigenvalues means the
// graph is too connected (double alpha); too many means it shattered (halve).
void adapt_alpha(double& alpha, const Vector& evals, double lnorm, int c) {
  const int nz = count_near_zero(evals, lnorm);
  if (nz < c)
    alpha *= 2.0;
  else if (nz > c)
    alpha /= 2.0;
}

bool converged_step(const std::vector<double>& trace, double rel_tol) {
  const std::size_t t = trace.size();
  if (t < 2) return false;
  const double prev = trace[t - 2];
  return std::abs(trace[t - 1] - prev) / std::max(std::abs(prev), 1.0) <
         rel_tol;
}

// Final clustering labels: the graph's components when they number exactly c,
// otherwise k-means on the row-normalized embedding.
std::vector<int> extract_labels(const AffinityGraph& graph, const Matrix& p,
                                const SolverConfig& cfg, int c) {
  const double tol = 1e-8 * graph.S.maxCoeff();
  const ComponentLabels cc = connected_components(graph.W, tol);
  if (cc.count == c) return cc.labels;
  return kmeans(p, c, cfg.kmeans_restarts, cfg.seed);
}

FitResult run_consensus_fit(const KernelBank& bank, const SolverConfig& cfg,
                            FitMode mode, const LabelVector* y,
                            const LabelMask* mask) {
  validate(cfg);
  check_bank(bank, mode == FitMode::ssl ? "fit_ssl" : "fit_clustering");
  const Index n = bank.n();
  int c = cfg.c;
  Matrix y_l;
  if (mode == FitMode::ssl) {
    c = y->num_classes;
    if (c < 2) throw Error("domain", "fit_ssl: need at least 2 classes");
    if (y->n() != n)
      throw Error("domain", "fit_ssl: labels must cover every sample");
    check_mask(*mask, n, "fit_ssl");
    y_l = one_hot_rows(*y, mask->labeled_idx, c);
    std::vector<char> covered(static_cast<std::size_t>(c), 0);
    for (int i : mask->labeled_idx)
      covered[static_cast<std::size_t>(y->labels[static_cast<std::size_t>(i)])] = 1;
    for (int k = 0; k < c; ++k)
      if (!covered[static_cast<std::size_t>(k)])
        throw Error("domain", "fit_ssl: class " + std::to_string(k) +
                                  " has no labeled sample");
  }
  if (c < 2 || c > static_cast<int>(n))
    throw Error("domain", "fit: need 2 <= c <= n");

  AffinityGraph graph = make_affinity(random_affinity_init(n, cfg.seed));
  Matrix k = bank_average(bank);
  Vector w = update_w(bank, k, cfg.epsilon_w);
  // Bootstrap the embedding from the random graph so the first column solve
  // has a neighborhood pull to work against.
  Matrix p = mode == FitMode::clustering
                 ? update_P_clustering(graph.L, c)
                 : update_P_ssl(graph.L, y_l, *mask, cfg.ridge);

  FitResult res;
  res.mode = mode;
  double alpha = cfg.alpha;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const Matrix g = indicator_sq_dists(p);
    graph = update_S(k, g, alpha, cfg.gamma);
    k = update_K(graph, bank, w, cfg.beta);
    if (!graph.S.allFinite() || !k.allFinite())
      throw Error("numeric",
                  "fit: alternating iteration diverged (non-finite S or K); "
                  "a larger beta or gamma usually stabilizes it");
    const Vector w_used = w;
    w = update_w(bank, k, cfg.epsilon_w);
    if (!w.allFinite() || w.minCoeff() <= 0.0)
      throw Error("numeric",
                  "fit: alternating iteration diverged (kernel residuals overflowed); "
                  "a larger beta or gamma usually stabilizes it");
    Vector evals;
    if (mode == FitMode::clustering) {
      const auto eig = smallest_eigenpairs(graph.L, n);
      p = eig.vectors.leftCols(c);
      evals = eig.values;
    } else {
      p = update_P_ssl(graph.L, y_l, *mask, cfg.ridge);
      if (cfg.adaptive_alpha)
        evals = smallest_eigenpairs(graph.L, n).values;
    }
    res.objective_trace.push_back(
        objective(graph.S, k, p, w_used, bank, alpha, cfg.beta, cfg.gamma));
    res.iterations = it;
    if (converged_step(res.objective_trace, cfg.rel_tol)) {
      res.converged = true;
      break;
    }
    if (cfg.adaptive_alpha) adapt_alpha(alpha, evals, graph.L.norm(), c);
  }
  res.alpha_final = alpha;
  res.labels = mode == FitMode::clustering ? extract_labels(graph, p, cfg, c)
                                           : decide_labels(p);
  res.S = std::move(graph.S);
  res.K = std::move(k);
  res.P = std::move(p);
  res.weights = std::move(w);
  return res;
}

// Shared single-kernel / parameterized-consensus loop; with `theta_update`
// false the kernel stays fixed (single-kernel graph learning).
FitResult run_graph_fit(const KernelBank& bank, const SolverConfig& cfg,
                        bool theta_update, const char* who) {
  validate(cfg);
  check_bank(bank, who);
  const Index n = bank.n();
  const int c = cfg.c;
  if (c < 2 || c > static_cast<int>(n))
    throw Error("domain", std::string(who) + ": need 2 <= c <= n");

  Vector theta;
  Matrix k;
  if (theta_update) {
    const int r = bank.size();
    theta = Vector::Constant(r, 1.0 / (static_cast<double>(r) * r));
    k = Matrix::Zero(n, n);
    for (int i = 0; i < r; ++i) k += theta(i) * bank.kernels[i].values;
  } else {
    k = bank.kernels[0].values;
  }

  AffinityGraph graph = make_affinity(random_affinity_init(n, cfg.seed));
  Matrix p = update_P_clustering(graph.L, c);

  FitResult res;
  res.mode = FitMode::clustering;
  double alpha = cfg.alpha;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const Matrix g = indicator_sq_dists(p);
    graph = update_S(k, g, alpha, cfg.gamma);
    if (!graph.S.allFinite())
      throw Error("numeric",
                  "fit: alternating iteration diverged (non-finite S); "
                  "a larger gamma usually stabilizes it");
    if (theta_update) {
      theta = pmkl_update_theta(bank, graph);
      k.setZero();
      for (int i = 0; i < bank.size(); ++i)
        k += theta(i) * bank.kernels[i].values;
    }
    const auto eig = smallest_eigenpairs(graph.L, n);
    p = eig.vectors.leftCols(c);
    res.objective_trace.push_back(
        graph_objective(graph.S, k, p, alpha, cfg.gamma));
    res.iterations = it;
    if (converged_step(res.objective_trace, cfg.rel_tol)) {
      res.converged = true;
      break;
    }
    if (cfg.adaptive_alpha) adapt_alpha(alpha, eig.values, graph.L.norm(), c);
  }
  res.alpha_final = alpha;
  res.labels = extract_labels(graph, p, cfg, c);
  res.S = std::move(graph.S);
  res.K = std::move(k);
  res.P = std::move(p);
  res.weights = std::move(theta);
  return res;
}

}  // namespace

FitResult fit_clustering(const KernelBank& bank, const SolverConfig& cfg) {
  return run_consensus_fit(bank, cfg, FitMode::clustering, nullptr, nullptr);
}

FitResult fit_ssl(const KernelBank& bank, const LabelVector& y,
                  const LabelMask& mask, const SolverConfig& cfg) {
  return run_consensus_fit(bank, cfg, FitMode::ssl, &y, &mask);
}

FitResult fit_kgl(const KernelMatrix& kernel, const SolverConfig& cfg) {
  if (kernel.values.rows() != kernel.values.cols())
    throw Error("domain", "fit_kgl: kernel must be square");
  KernelBank single;
  single.recipe = "single";
  single.kernels.push_back(kernel);
  FitResult res = run_graph_fit(single, cfg, false, "fit_kgl");
  res.weights = Vector();
  return res;
}

FitResult fit_pmkl(const KernelBank& bank, const SolverConfig& cfg) {
  return run_graph_fit(bank, cfg, true, "fit_pmkl");
}

Matrix one_hot_rows(const LabelVector& y, const std::vector<int>& labeled_idx,
                    int c) {
  Matrix out = Matrix::Zero(static_cast<Index>(labeled_idx.size()), c);
  for (std::size_t t = 0; t < labeled_idx.size(); ++t) {
    const int i = labeled_idx[t];
    if (i < 0 || i >= y.n())
      throw Error("domain", "one_hot_rows: index out of range");
    const int lab = y.labels[static_cast<std::size_t>(i)];
    if (lab < 0 || lab >= c)
      throw Error("domain", "one_hot_rows: sample " + std::to_string(i) +
                                " has no usable label");
    out(static_cast<Index>(t), lab) = 1.0;
  }
  return out;
}

namespace {

template <typename Sequence, typename Format>
void write_joined(std::ostream& out, const char* key, const Sequence& seq,
                  Format format) {
  out << key << '=';
  for (Index i = 0; i < static_cast<Index>(seq.size()); ++i) {
    if (i) out << ',';
    out << format(seq[static_cast<std::size_t>(i)]);
  }
  out << '\n';
}

}  // namespace

void write_fit_result(std::ostream& out, const FitResult& result) {
  out << "mode=" << (result.mode == FitMode::ssl ? "ssl" : "clustering")
      << '\n';
  out << "iterations=" << result.iterations << '\n';
  out << "converged=" << (result.converged ? 1 : 0) << '\n';
  out << "alpha_final=" << format_g17(result.alpha_final) << '\n';
  std::vector<double> weights(result.weights.data(),
                              result.weights.data() + result.weights.size());
  write_joined(out, "weights", weights,
               [](double v) { return format_g17(v); });
  write_joined(out, "labels", result.labels,
               [](int v) { return std::to_string(v); });
  write_joined(out, "objective_trace", result.objective_trace,
               [](double v) { return format_g17(v); });
}

}  // namespace smkl
