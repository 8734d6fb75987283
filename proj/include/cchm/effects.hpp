#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "cchm/graph.hpp"
#include "cchm/simulate.hpp"

namespace cchm {

/// Direction picked by comparing the two interventional effects.
enum class EffectDirection { AtoB, BtoA, Tie };

struct EffectPair {
    NodeId a = 0;
    NodeId b = 0;
    double beta_a = 0.0;  // effect of do(A) on B
    double beta_b = 0.0;  // effect of do(B) on A
    EffectDirection chosen = EffectDirection::Tie;
};

/// E[Y X^T] / N. Uncentred unless `centred` is set.
Eigen::MatrixXd second_moments(const Dataset& data, bool centred = false);

/// beta_A = E[BA] / E[A^2] from a second-moment matrix.
template <typename Derived>
double direct_effect(const Eigen::MatrixBase<Derived>& moments, NodeId a, NodeId b) {
    const double denom = moments(a, a);
    if (!(denom > 0.0)) throw std::domain_error("direct_effect: E[A^2] is zero");
    return moments(b, a) / denom;
}

/// Effects in both directions; the larger absolute effect marks the cause.
template <typename Derived>
EffectPair orient_pair(const Eigen::MatrixBase<Derived>& moments, NodeId a, NodeId b) {
    const bool a_ok = moments(a, a) > 0.0;
    const bool b_ok = moments(b, b) > 0.0;
    if (!a_ok && !b_ok) throw std::domain_error("orient_pair: both variables are degenerate");
    EffectPair out{a, b, 0.0, 0.0, EffectDirection::Tie};
    if (a_ok) out.beta_a = direct_effect(moments, a, b);
    if (b_ok) out.beta_b = direct_effect(moments, b, a);
    if (!a_ok) {
        out.chosen = EffectDirection::BtoA;
    } else if (!b_ok) {
        out.chosen = EffectDirection::AtoB;
    } else if (std::abs(out.beta_a) > std::abs(out.beta_b)) {
        out.chosen = EffectDirection::AtoB;
    } else if (std::abs(out.beta_b) > std::abs(out.beta_a)) {
        out.chosen = EffectDirection::BtoA;
    }
    return out;
}

}  // namespace cchm
