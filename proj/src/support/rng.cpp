#include "vppflex/support/rng.hpp"

#include "vppflex/support/stats.hpp"

namespace vppflex::support {

double RandomStream::normal() { return normal_quantile(uniform()); }

}  // namespace vppflex::support
