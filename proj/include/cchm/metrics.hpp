#pragma once

#include <optional>
#include <stdexcept>

#include "cchm/graph.hpp"

namespace cchm {

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Skeleton-level confusion counts over unordered node pairs.
struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;
    long a = 0;  // true edges
    long i = 0;  // true non-edges
};

ConfusionCounts confusion(const MixedGraph& learned, const MixedGraph& truth);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// Precision is 0 when nothing is learned, unless the truth is empty too (then 1).
/// Recall is 1 for an empty truth.
PrecisionRecall precision_recall(const ConfusionCounts& c);

/// +1 per pair adjacent in exactly one graph, +1 per differing endpoint mark otherwise.
long shd(const MixedGraph& learned, const MixedGraph& truth);

/// 0.5 (TP/a + TN/i - FP/i - FN/a); empty when a = 0 or i = 0.
std::optional<double> bsf(const ConfusionCounts& c);

/// Endpoint-level scores for arrowheads and tails, over ordered pairs.
struct MarkScores {
    PrecisionRecall arrow;
    PrecisionRecall tail;
};

MarkScores mark_scores(const MixedGraph& learned, const MixedGraph& truth);

}  // namespace cchm
