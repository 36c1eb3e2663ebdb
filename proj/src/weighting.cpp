#include "puembed/weighting.hpp"

#include <cmath>
#include <stdexcept>

namespace puembed {

void WeightConfig::validate() const {
  if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be > 0");
  if (!(weight_alpha > 0.0 && weight_alpha <= 1.0)) {
    throw std::invalid_argument("weight_alpha must be in (0, 1]");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("rho must be in [0, 1]");
  }
  const double min_observed = std::pow(1.0 / x_max, weight_alpha);
  if (rho > min_observed && !allow_indefinite) {
    throw std::invalid_argument(
        "rho exceeds the minimum observed weight (1/x_max)^alpha = " +
        std::to_string(min_observed) +
        "; effective observed weights would go negative (pass "
        "--allow-indefinite to override)");
  }
}

double positive_weight(double q, const WeightConfig& cfg) {
  if (!(q > 0.0)) {
    throw std::logic_error("positive_weight called with non-positive count");
  }
  if (q > cfg.x_max) return 1.0;
  return std::pow(q / cfg.x_max, cfg.weight_alpha);
}

SparseMatrix weight_matrix(const SparseMatrix& q, const WeightConfig& cfg) {
  cfg.validate();
  SparseMatrix c = q;
  for (auto& v : c.values) v = positive_weight(v, cfg);
  return c;
}

}  // namespace puembed
