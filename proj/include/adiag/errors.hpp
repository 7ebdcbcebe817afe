#pragma once

// Error taxonomy shared by all adiag modules. Every failure mode named in a
// module contract gets its own type so callers can branch on it.

#include <stdexcept>
#include <string>
#include <vector>

namespace adiag {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotHermitian : Error {
    using Error::Error;
};
struct NotUnitary : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};
struct ZeroVector : Error {
    using Error::Error;
};
struct Singular : Error {
    using Error::Error;
};
struct BadResolution : Error {
    using Error::Error;
};
struct NotInvertible : Error {
    using Error::Error;
};
struct DimensionObstruction : Error {
    using Error::Error;
};
struct PerturbationFailed : Error {
    using Error::Error;
};
struct GapCollapse : Error {
    using Error::Error;
};
struct Unresolved : Error {
    using Error::Error;
};
struct NotClosed : Error {
    using Error::Error;
};
struct NotOrthogonal : Error {
    using Error::Error;
};
struct RoundingAmbiguous : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

// Carries the offending integer invariant (Chern number of the band that
// refused to trivialize).
struct ObstructionError : Error {
    int band;
    int chern;
    ObstructionError(int band_, int chern_)
        : Error("band " + std::to_string(band_) + " has nonzero Chern number " +
                std::to_string(chern_)),
          band(band_),
          chern(chern_) {}
};

// No rotation of the unit circle clears the unitary spectrum away from -1.
// The histogram counts eigenvalue angles in 720 bins over (-pi, pi].
struct NoCommonGap : Error {
    std::vector<int> angle_histogram;
    explicit NoCommonGap(std::vector<int> hist)
        : Error("unitary spectrum leaves no common branch-cut gap"),
          angle_histogram(std::move(hist)) {}
};

}  // namespace adiag
