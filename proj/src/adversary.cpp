#include "datd/adversary.hpp"

#include "datd/error.hpp"

namespace datd {

void validate(const BehaviorProfile& profile) {
  if (!(profile.tamper_range >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tamper range must be >= 0");
  }
  if (!(profile.noise_fraction >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "noise fraction must be >= 0");
  }
}

double tamper_factor(const BehaviorProfile& profile, RngStream& rng) {
  const double u = profile.tamper_range * rng.uniform();
  const bool upward = rng.uniform() < 0.5;
  if (profile.direction == TamperDirection::symmetric && upward) return 1.0 + u;
  return 1.0 - u;
}

double report(const BehaviorProfile& profile, double truth, double task_value,
              RngStream& rng) {
  validate(profile);
  if (!(truth > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "truth must be positive");
  }
  const bool attacking = profile.kind == BehaviorKind::high_value_attacker &&
                         is_high_value(profile, task_value);
  if (attacking) return truth * tamper_factor(profile, rng);
  return truth * (1.0 + rng.normal(0.0, profile.noise_fraction));
}

double node_report(const BehaviorProfile& profile, double first_td_estimate,
                   double task_value, RngStream& rng) {
  validate(profile);
  const bool attacking = profile.kind == BehaviorKind::high_value_attacker &&
                         is_high_value(profile, task_value);
  if (!attacking) return first_td_estimate;
  return first_td_estimate * tamper_factor(profile, rng);
}

}  // namespace datd
