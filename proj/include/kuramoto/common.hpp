#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace kuramoto {

inline constexpr double PI = 3.14159265358979323846;
inline constexpr double TWO_PI = 2.0 * PI;

// Below this value of R the mean phase is treated as undefined.
inline constexpr double R_PHASE_EPS = 1e-12;

// Canonical representative of an angle in [0, 2*pi).
inline double wrap_angle(double theta) {
    double w = std::fmod(theta, TWO_PI);
    if (w < 0.0) w += TWO_PI;
    if (w >= TWO_PI) w = 0.0;
    return w;
}

// Signed representative of an angle difference in (-pi, pi].
inline double wrap_signed(double delta) {
    double w = std::fmod(delta, TWO_PI);
    if (w <= -PI) w += TWO_PI;
    if (w > PI) w -= TWO_PI;
    return w;
}

// Geodesic distance on the circle, in [0, pi].
inline double circle_dist(double a, double b) {
    return std::fabs(wrap_signed(a - b));
}

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct NoPhaseLockedEquilibrium : DomainError {
    explicit NoPhaseLockedEquilibrium(const std::string& what) : DomainError(what) {}
};
struct StepTooLarge : DomainError {
    explicit StepTooLarge(const std::string& what) : DomainError(what) {}
};
struct CFLViolation : DomainError {
    explicit CFLViolation(const std::string& what) : DomainError(what) {}
};
struct MassMismatch : DomainError {
    explicit MassMismatch(const std::string& what) : DomainError(what) {}
};
struct MarginalMismatch : DomainError {
    explicit MarginalMismatch(const std::string& what) : DomainError(what) {}
};
struct InstanceTooLarge : DomainError {
    explicit InstanceTooLarge(const std::string& what) : DomainError(what) {}
};
struct PhiUndefined : DomainError {
    explicit PhiUndefined(const std::string& what) : DomainError(what) {}
};
struct OutOfRange : DomainError {
    explicit OutOfRange(const std::string& what) : DomainError(what) {}
};
struct DegenerateTrajectory : DomainError {
    explicit DegenerateTrajectory(const std::string& what) : DomainError(what) {}
};
struct WindowBelowFloor : DomainError {
    explicit WindowBelowFloor(const std::string& what) : DomainError(what) {}
};
struct NeverEntered : DomainError {
    explicit NeverEntered(const std::string& what) : DomainError(what) {}
};
struct ConfigError : DomainError {
    explicit ConfigError(const std::string& what) : DomainError(what) {}
};

}  // namespace kuramoto
