#include "vppflex/model/types.hpp"

#include <cmath>
#include <stdexcept>

namespace vppflex::model {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::upward: return "upward";
    case Direction::downward: return "downward";
    case Direction::symmetrical: return "symmetrical";
  }
  return "?";
}

std::string_view to_string(VppState s) {
  switch (s) {
    case VppState::disp: return "disp";
    case VppState::up: return "up";
    case VppState::down: return "down";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "upward" || text == "up") return Direction::upward;
  if (text == "downward" || text == "down") return Direction::downward;
  if (text == "symmetrical" || text == "symmetric") return Direction::symmetrical;
  return std::nullopt;
}

std::vector<VppState> states_for(Direction d) {
  switch (d) {
    case Direction::upward: return {VppState::disp, VppState::up};
    case Direction::downward: return {VppState::disp, VppState::down};
    case Direction::symmetrical: return {VppState::disp, VppState::up, VppState::down};
  }
  return {VppState::disp};
}

namespace {
bool is_multiple(double value, double step) {
  const double k = value / step;
  return std::abs(k - std::round(k)) < 1e-9 * std::max(1.0, std::abs(k));
}
}  // namespace

std::size_t ProductSpec::first_step() const {
  return static_cast<std::size_t>(std::llround(delivery_start_h / step_h));
}

std::size_t ProductSpec::step_count() const {
  return static_cast<std::size_t>(std::llround(duration_h / step_h));
}

std::vector<std::size_t> ProductSpec::delivery_steps() const {
  std::vector<std::size_t> steps(step_count());
  for (std::size_t k = 0; k < steps.size(); ++k) steps[k] = first_step() + k;
  return steps;
}

std::vector<std::string> ProductSpec::check() const {
  std::vector<std::string> out;
  if (!(step_h > 0.0)) {
    out.emplace_back("step must be positive");
    return out;
  }
  if (!(duration_h > 0.0)) out.emplace_back("duration must be positive");
  else if (!is_multiple(duration_h, step_h)) out.emplace_back("duration must be an integer multiple of the step");
  if (!(delivery_start_h >= 0.0) || !is_multiple(delivery_start_h, step_h))
    out.emplace_back("delivery start must be a non-negative multiple of the step");
  if (!(ramp_time_min > 0.0)) out.emplace_back("ramp time must be positive");
  if (!(reliability > 0.0 && reliability < 1.0)) out.emplace_back("reliability must lie in (0,1)");
  return out;
}

std::optional<std::size_t> RadialNetwork::bus_index(std::string_view id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return i;
  return std::nullopt;
}

std::size_t RadialNetwork::slack_index() const {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!buses[i].slack) continue;
    if (found) throw std::logic_error("network has more than one slack bus");
    found = i;
  }
  if (!found) throw std::logic_error("network has no slack bus");
  return *found;
}

double FixedLoad::q_over_p() const { return std::tan(std::acos(power_factor)); }

}  // namespace vppflex::model
