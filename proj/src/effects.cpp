#include "cchm/effects.hpp"

namespace cchm {

Eigen::MatrixXd second_moments(const Dataset& data, bool centred) {
    const long n = data.samples();
    if (n < 1) throw std::invalid_argument("second_moments: empty dataset");
    if (!centred) return (data.values.transpose() * data.values) / static_cast<double>(n);
    const Eigen::MatrixXd x = data.values.rowwise() - data.values.colwise().mean();
    return (x.transpose() * x) / static_cast<double>(n);
}

}  // namespace cchm
