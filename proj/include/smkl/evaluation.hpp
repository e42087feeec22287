#pragma once

#include <vector>

#include <smkl/types.hpp>

namespace smkl {

// Metrics for one prediction/truth pair. `confusion(t, m)` counts samples of
// true class t assigned matched label m, so acc = trace(confusion)/n.
struct MetricReport {
  double acc = 0.0;
  double nmi = 0.0;
  Eigen::MatrixXi confusion;
};

// Best-bijection accuracy: maximum fraction matched over all cluster-to-class
// bijections, found by minimum-cost assignment on the negated contingency
// table (padded square with zeros).
double clustering_accuracy(const std::vector<int>& pred,
                           const std::vector<int>& truth);

// Normalized mutual information with natural logs and sqrt(H·H')
// normalization. Two constant partitions agree (1.0); a constant against a
// non-constant partition scores 0.0 with a warning on stderr.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

// Full report with Hungarian matching (cluster labels carry no fixed class
// identity).
MetricReport evaluate(const std::vector<int>& pred,
                      const std::vector<int>& truth);

// Restricted report for label propagation: plain label match over the given
// indices only (class identities are anchored by the given labels, so no
// matching step). Empty index set is an error.
MetricReport evaluate(const std::vector<int>& pred,
                      const std::vector<int>& truth,
                      const std::vector<int>& restrict_idx);

}  // namespace smkl
