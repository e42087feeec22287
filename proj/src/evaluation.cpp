#include <smkl/evaluation.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>

#include <smkl/numerics.hpp>

namespace smkl {

namespace {

// Rows are predicted labels, columns are true labels.
Eigen::MatrixXi contingency(const std::vector<int>& pred,
                            const std::vector<int>& truth, const char* who) {
  if (pred.size() != truth.size())
    throw Error("domain", std::string(who) + ": label vectors differ in length");
  if (pred.empty()) throw Error("domain", std::string(who) + ": empty labels");
  int cp = 0, ct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0)
      throw Error("domain", std::string(who) + ": labels must be >= 0");
    cp = std::max(cp, pred[i] + 1);
    ct = std::max(ct, truth[i] + 1);
  }
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(cp, ct);
  for (std::size_t i = 0; i < pred.size(); ++i) ++m(pred[i], truth[i]);
  return m;
}

// Bijection predicted-cluster -> true-class maximizing the matched count,
// via minimum-cost assignment on the negated table.
std::vector<int> best_matching(const Eigen::MatrixXi& m) {
  const Index c = std::max(m.rows(), m.cols());
  Matrix cost = Matrix::Zero(c, c);
  cost.topLeftCorner(m.rows(), m.cols()) = -m.cast<double>();
  return hungarian(cost).perm;
}

}  // namespace

double clustering_accuracy(const std::vector<int>& pred,
                           const std::vector<int>& truth) {
  const Eigen::MatrixXi m = contingency(pred, truth, "clustering_accuracy");
  const std::vector<int> perm = best_matching(m);
  long matched = 0;
  for (Index p = 0; p < m.rows(); ++p) {
    const int cls = perm[static_cast<std::size_t>(p)];
    if (cls < m.cols()) matched += m(p, cls);
  }
  return static_cast<double>(matched) / static_cast<double>(pred.size());
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Eigen::MatrixXi counts = contingency(pred, truth, "nmi");
  const double n = static_cast<double>(pred.size());
  const Eigen::VectorXi a = counts.rowwise().sum();
  const Eigen::VectorXi b = counts.colwise().sum();

  auto entropy = [n](const Eigen::VectorXi& marg) {
    double h = 0;
    for (Index i = 0; i < marg.size(); ++i)
      if (marg(i) > 0) {
        const double p = marg(i) / n;
        h -= p * std::log(p);
      }
    return h;
  };
  const double hp = entropy(a);
  const double ht = entropy(b);
  if (hp <= 0 && ht <= 0) return 1.0;  // both single-block partitions agree
  if (hp <= 0 || ht <= 0) {
    std::cerr << "warning: nmi of a constant against a non-constant "
                 "partition is 0\n";
    return 0.0;
  }

  double mi = 0;
  for (Index i = 0; i < counts.rows(); ++i)
    for (Index j = 0; j < counts.cols(); ++j)
      if (counts(i, j) > 0) {
        const double pij = counts(i, j) / n;
        mi += pij * std::log(pij * n * n / (static_cast<double>(a(i)) * b(j)));
      }
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

MetricReport evaluate(const std::vector<int>& pred,
                      const std::vector<int>& truth) {
  const Eigen::MatrixXi m = contingency(pred, truth, "evaluate");
  const std::vector<int> perm = best_matching(m);
  const int c = static_cast<int>(std::max(m.rows(), m.cols()));

  MetricReport report;
  report.confusion = Eigen::MatrixXi::Zero(c, c);
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++report.confusion(truth[i], perm[static_cast<std::size_t>(pred[i])]);
  report.acc = static_cast<double>(report.confusion.trace()) /
               static_cast<double>(pred.size());
  report.nmi = nmi(pred, truth);
  return report;
}

MetricReport evaluate(const std::vector<int>& pred,
                      const std::vector<int>& truth,
                      const std::vector<int>& restrict_idx) {
  if (pred.size() != truth.size())
    throw Error("domain", "evaluate: label vectors differ in length");
  if (restrict_idx.empty())
    throw Error("domain", "evaluate: empty restriction set");
  std::vector<int> p, t;
  p.reserve(restrict_idx.size());
  t.reserve(restrict_idx.size());
  for (int i : restrict_idx) {
    if (i < 0 || static_cast<std::size_t>(i) >= pred.size())
      throw Error("domain", "evaluate: restriction index out of range");
    p.push_back(pred[static_cast<std::size_t>(i)]);
    t.push_back(truth[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXi m = contingency(p, t, "evaluate");
  const int c = static_cast<int>(std::max(m.rows(), m.cols()));

  MetricReport report;
  report.confusion = Eigen::MatrixXi::Zero(c, c);
  report.confusion.topLeftCorner(m.cols(), m.rows()) =
      m.transpose();  // rows: true class, cols: predicted label as-is
  report.acc = static_cast<double>(report.confusion.trace()) /
               static_cast<double>(p.size());
  report.nmi = nmi(p, t);
  return report;
}

}  // namespace smkl
