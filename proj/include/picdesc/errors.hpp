#pragma once

#include <stdexcept>
#include <string>

namespace picdesc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// corpus
struct MissingPicture : Error { using Error::Error; };
struct DuplicateSampleId : Error { using Error::Error; };
struct EmptySample : Error { using Error::Error; };
struct UnknownLabel : Error { using Error::Error; };

// embedding
struct BackendUnavailable : Error { using Error::Error; };
struct EmptyText : Error { using Error::Error; };
struct DegenerateCrop : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// relevance
struct IndexOutOfRange : Error { using Error::Error; };
struct MissingLabelClass : Error { using Error::Error; };

// regions
struct ImageTooSmall : Error { using Error::Error; };

// filtering
struct EmptySelection : Error { using Error::Error; };

// subimage model
struct ZeroVector : Error { using Error::Error; };
struct SingleClass : Error { using Error::Error; };
struct NoProposals : Error { using Error::Error; };

// focused areas
struct InsufficientAreas : Error { using Error::Error; };

// classify/eval
struct InfeasibleConfig : Error { using Error::Error; };

// viz
struct BoxOutOfBounds : Error { using Error::Error; };

}  // namespace picdesc
