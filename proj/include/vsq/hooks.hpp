#pragma once

namespace vsq {

/// Deliberate faults used by the negative controls of the verification suite. Both are inert
/// at their defaults; set them before starting any computation.
struct FaultInjection {
  double pair_coefficient_scale = 1.0;  ///< multiplies the photon pair-term coefficient
  double gradient_offset = 0.0;         ///< added to every analytic parameter gradient
};

inline FaultInjection& fault_injection() {
  static FaultInjection hooks;
  return hooks;
}

}  // namespace vsq
