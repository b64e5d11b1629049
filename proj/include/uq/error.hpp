#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uq {

enum class Errc : std::uint8_t {
    EmptyEnsemble,
    SingleSample,
    MetaMismatch,
    InvalidVolume,
    FormatError,
    NoForegroundChannels,
    InfeasibleConfig,
    CaseOutOfRange,
    OrganIndexOutOfRange,
    TooFewSamples,
    DimensionMismatch,
    NonFiniteScore,
    SingularCovariance,
    LevelOutOfRange,
    MissingHoldoutPredictions,
    OneClassOnly,
    ConfigInvalid,
    MissingPlan,
    MissingManifest,
    IoFailure,
};

// Coarse classes; the CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorClass : std::uint8_t { Validation, Io, Statistical };

constexpr ErrorClass error_class(Errc code) {
    switch (code) {
    case Errc::IoFailure:
    case Errc::MissingPlan:
    case Errc::MissingManifest:
        return ErrorClass::Io;
    case Errc::SingularCovariance:
    case Errc::TooFewSamples:
        return ErrorClass::Statistical;
    default:
        return ErrorClass::Validation;
    }
}

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace uq
