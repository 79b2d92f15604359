#pragma once

#include <compare>
#include <limits>
#include <ostream>

namespace edgeplace {

/// Milliseconds of network delay, or the explicit "unreachable" state.
///
/// Unreachable absorbs addition and compares greater than every finite value,
/// so sums over paths and chains never have to special-case it.
class Latency {
 public:
  constexpr Latency() = default;
  constexpr explicit Latency(double ms) : ms_(ms), reachable_(true) {}

  static constexpr Latency zero() { return Latency(0.0); }
  static constexpr Latency unreachable() { return Latency(); }

  [[nodiscard]] constexpr bool finite() const { return reachable_; }
  [[nodiscard]] constexpr double ms() const {
    return reachable_ ? ms_ : std::numeric_limits<double>::infinity();
  }

  constexpr Latency& operator+=(Latency other) {
    if (!reachable_ || !other.reachable_) {
      *this = unreachable();
    } else {
      ms_ += other.ms_;
    }
    return *this;
  }
  friend constexpr Latency operator+(Latency a, Latency b) { return a += b; }

  friend constexpr bool operator==(Latency a, Latency b) {
    return a.reachable_ == b.reachable_ && (!a.reachable_ || a.ms_ == b.ms_);
  }
  friend constexpr std::partial_ordering operator<=>(Latency a, Latency b) {
    if (!a.reachable_ && !b.reachable_) return std::partial_ordering::equivalent;
    if (!a.reachable_) return std::partial_ordering::greater;
    if (!b.reachable_) return std::partial_ordering::less;
    return a.ms_ <=> b.ms_;
  }

  /// True when this latency meets a limit given in milliseconds.
  [[nodiscard]] constexpr bool within(double limit_ms) const {
    return reachable_ && ms_ <= limit_ms + kTolerance;
  }

  /// Absolute slack used by `within` so that sums such as 0.1 + 0.2 still
  /// meet a 0.3 ms limit.
  static constexpr double kTolerance = 1e-12;

 private:
  double ms_ = 0.0;
  bool reachable_ = false;
};

inline std::ostream& operator<<(std::ostream& os, Latency l) {
  if (!l.finite()) return os << "unreachable";
  return os << l.ms() << "ms";
}

}  // namespace edgeplace
