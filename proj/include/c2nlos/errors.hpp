#pragma once

#include <stdexcept>

namespace c2nlos {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// geometry
struct InvalidSinusoid : Error { using Error::Error; };

// forward simulation
struct RangeOverflow : Error { using Error::Error; };
struct CircleOutOfBounds : Error { using Error::Error; };

// localization
struct InsufficientPeaks : Error { using Error::Error; };
struct CollinearPoints : Error { using Error::Error; };

// 2d imaging
struct EmptySinogram : Error { using Error::Error; };
struct WindowOutOfRange : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };

// 3d reconstruction
struct AdmmDiverged : Error { using Error::Error; };

// io
struct MalformedHeader : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };
struct UnsupportedDtype : Error { using Error::Error; };

}  // namespace c2nlos
