#pragma once

#include <stdexcept>
#include <string>

namespace moseg {

// Base for all typed pipeline errors. Subcommands catch this and turn it
// into a one-line diagnostic plus a nonzero exit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define MOSEG_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& msg)                      \
            : Error(std::string(#Name) + ": " + msg) {}            \
    }

MOSEG_DEFINE_ERROR(MalformedFile);
MOSEG_DEFINE_ERROR(NonFiniteValue);
MOSEG_DEFINE_ERROR(MissingFile);
MOSEG_DEFINE_ERROR(DimensionMismatch);
MOSEG_DEFINE_ERROR(UnknownTrackId);
MOSEG_DEFINE_ERROR(InsufficientData);
MOSEG_DEFINE_ERROR(NumericalFailure);
MOSEG_DEFINE_ERROR(InvalidK);
MOSEG_DEFINE_ERROR(TrackSetMismatch);
MOSEG_DEFINE_ERROR(IoFailure);
MOSEG_DEFINE_ERROR(InvalidArgument);

#undef MOSEG_DEFINE_ERROR

}  // namespace moseg
