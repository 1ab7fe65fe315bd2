#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chaology {

/// Base of every error the library raises. `code()` is the stable,
/// machine-readable name used by the CLI's error reports.
class Error : public std::runtime_error {
public:
    Error(std::string_view code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define CHAOLOGY_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    };

CHAOLOGY_DEFINE_ERROR(InvalidArgument)
CHAOLOGY_DEFINE_ERROR(StepFailure)
CHAOLOGY_DEFINE_ERROR(InsufficientData)
CHAOLOGY_DEFINE_ERROR(DimensionOverflow)
CHAOLOGY_DEFINE_ERROR(ConvergenceFailure)
CHAOLOGY_DEFINE_ERROR(ParamMismatch)
CHAOLOGY_DEFINE_ERROR(RangeError)
CHAOLOGY_DEFINE_ERROR(ChecksumMismatch)
CHAOLOGY_DEFINE_ERROR(VersionMismatch)
CHAOLOGY_DEFINE_ERROR(TruncatedFile)
CHAOLOGY_DEFINE_ERROR(FitDegenerate)
CHAOLOGY_DEFINE_ERROR(TruncationError)
CHAOLOGY_DEFINE_ERROR(OverflowGuard)
CHAOLOGY_DEFINE_ERROR(NoConvergence)
CHAOLOGY_DEFINE_ERROR(SingularReference)
CHAOLOGY_DEFINE_ERROR(NonPositiveDelta)
CHAOLOGY_DEFINE_ERROR(GridMismatch)

#undef CHAOLOGY_DEFINE_ERROR

}  // namespace chaology
