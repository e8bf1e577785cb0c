#pragma once

#include <stdexcept>
#include <string>

namespace vibtrack {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// sim
struct NyquistViolation : Error { using Error::Error; };
struct InvalidProfile : Error { using Error::Error; };

// spectral
struct BinOutOfRange : Error { using Error::Error; };
struct WindowLengthMismatch : Error { using Error::Error; };
struct InvalidWindowing : Error { using Error::Error; };
struct Uninitialized : Error { using Error::Error; };

// losses / model
struct ShapeMismatch : Error { using Error::Error; };
struct NonBinaryTarget : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// trainer / dataio
struct VideoTooShort : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct TooFewVideos : Error { using Error::Error; };

// postproc
struct InsufficientPoints : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };

// annotate
struct TipOutOfImage : Error { using Error::Error; };
struct DegenerateSegment : Error { using Error::Error; };

// eval
struct EmptyRecordSet : Error { using Error::Error; };

// cli
struct UsageError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };

}  // namespace vibtrack
