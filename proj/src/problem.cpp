#include "vche/problem.hpp"

#include <algorithm>
#include <cmath>

#include "vche/errors.hpp"

namespace vche {

int ProblemConfig::steps() const { return static_cast<int>(std::lround(t_final / dt)); }

void ProblemConfig::validate() const {
  params.validate();
  grid.validate();
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw InvalidArgument("t_final must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (dt > t_final) throw InvalidArgument("dt must not exceed t_final");
  if (std::abs(steps() * dt - t_final) > 1e-12 * std::max(1.0, t_final)) {
    throw InvalidArgument("dt must divide t_final");
  }
}

}  // namespace vche
