#include "rpde/holder_algebra.hpp"

namespace rpde {

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::Holder: return "holder";
    case NormKind::BetaBeta: return "beta_beta";
    case NormKind::AlphaBetaBeta: return "alpha_beta_beta";
    case NormKind::Sup: return "sup";
  }
  return "unknown";
}

double rough_distance(const RoughLift& a, const RoughLift& b, double alpha) {
  if (!a.grid().same_as(b.grid())) throw GridError("rough_distance: grid mismatch");
  if (a.modes() != b.modes()) throw GridError("rough_distance: mode mismatch");
  const TimeGrid& g = a.grid();
  double first = 0.0, second = 0.0;
  for (std::size_t k = 1; k < g.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j) {
      const double dt = g.node(k) - g.node(j);
      const double d1 = ((a.first[k] - b.first[k]) - (a.first[j] - b.first[j])).norm();
      const double d2 = (a.second.at(k, j) - b.second.at(k, j)).norm();
      first = std::max(first, d1 / std::pow(dt, alpha));
      second = std::max(second, d2 / std::pow(dt, 2.0 * alpha));
    }
  return first + second;
}

}  // namespace rpde
