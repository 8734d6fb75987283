#include "cchm/metrics.hpp"

namespace cchm {

namespace {

void check_nodes(const MixedGraph& learned, const MixedGraph& truth) {
    if (learned.names() != truth.names()) throw MetricError("graphs have different node sets");
}

PrecisionRecall ratio(long hit, long predicted, long actual) {
    PrecisionRecall out;
    if (predicted > 0) {
        out.precision = static_cast<double>(hit) / static_cast<double>(predicted);
    } else {
        out.precision = actual == 0 ? 1.0 : 0.0;
    }
    out.recall = actual > 0 ? static_cast<double>(hit) / static_cast<double>(actual) : 1.0;
    return out;
}

}  // namespace

ConfusionCounts confusion(const MixedGraph& learned, const MixedGraph& truth) {
    check_nodes(learned, truth);
    ConfusionCounts c;
    const int n = truth.size();
    for (NodeId x = 0; x < n; ++x) {
        for (NodeId y = x + 1; y < n; ++y) {
            const bool t = truth.adjacent(x, y);
            const bool l = learned.adjacent(x, y);
            if (t) {
                ++c.a;
                ++(l ? c.tp : c.fn);
            } else {
                ++c.i;
                ++(l ? c.fp : c.tn);
            }
        }
    }
    return c;
}

PrecisionRecall precision_recall(const ConfusionCounts& c) {
    if (c.tp + c.fn != c.a || c.fp + c.tn != c.i || c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) {
        throw MetricError("precision_recall: inconsistent counts");
    }
    return ratio(c.tp, c.tp + c.fp, c.a);
}

long shd(const MixedGraph& learned, const MixedGraph& truth) {
    check_nodes(learned, truth);
    long d = 0;
    const int n = truth.size();
    for (NodeId x = 0; x < n; ++x) {
        for (NodeId y = x + 1; y < n; ++y) {
            const bool t = truth.adjacent(x, y);
            if (t != learned.adjacent(x, y)) {
                ++d;
            } else if (t) {
                d += (truth.mark(x, y) != learned.mark(x, y)) + (truth.mark(y, x) != learned.mark(y, x));
            }
        }
    }
    return d;
}

std::optional<double> bsf(const ConfusionCounts& c) {
    if (c.a <= 0 || c.i <= 0) return std::nullopt;
    const double a = static_cast<double>(c.a);
    const double i = static_cast<double>(c.i);
    return 0.5 * (c.tp / a + c.tn / i - c.fp / i - c.fn / a);
}

MarkScores mark_scores(const MixedGraph& learned, const MixedGraph& truth) {
    check_nodes(learned, truth);
    long arrow_hit = 0, arrow_learned = 0, arrow_true = 0;
    long tail_hit = 0, tail_learned = 0, tail_true = 0;
    const int n = truth.size();
    for (NodeId x = 0; x < n; ++x) {
        for (NodeId y = 0; y < n; ++y) {
            if (x == y) continue;
            const Mark t = truth.mark(x, y);
            const Mark l = learned.mark(x, y);
            arrow_true += t == Mark::Arrow;
            arrow_learned += l == Mark::Arrow;
            arrow_hit += t == Mark::Arrow && l == Mark::Arrow;
            tail_true += t == Mark::Tail;
            tail_learned += l == Mark::Tail;
            tail_hit += t == Mark::Tail && l == Mark::Tail;
        }
    }
    return {ratio(arrow_hit, arrow_learned, arrow_true), ratio(tail_hit, tail_learned, tail_true)};
}

}  // namespace cchm
