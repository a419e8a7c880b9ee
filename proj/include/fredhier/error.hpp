#ifndef FREDHIER_ERROR_HPP
#define FREDHIER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fredhier {

enum class Errc {
    UnsupportedOrder,
    UnsupportedFamily,
    NonFinite,
    BadWindow,
    TruncationTooTight,
    SingularMatrix,
    GridMismatch,
    InsufficientDepth,
    DerivativeDepthExceeded,
    WrongKernelFamily,
    DivergentIntegral,
    ExponentialOverflow,
    BlowUp,
    BadArgument,
};

inline const char* errc_name(Errc e) {
    switch (e) {
    case Errc::UnsupportedOrder: return "UnsupportedOrder";
    case Errc::UnsupportedFamily: return "UnsupportedFamily";
    case Errc::NonFinite: return "NonFinite";
    case Errc::BadWindow: return "BadWindow";
    case Errc::TruncationTooTight: return "TruncationTooTight";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::InsufficientDepth: return "InsufficientDepth";
    case Errc::DerivativeDepthExceeded: return "DerivativeDepthExceeded";
    case Errc::WrongKernelFamily: return "WrongKernelFamily";
    case Errc::DivergentIntegral: return "DivergentIntegral";
    case Errc::ExponentialOverflow: return "ExponentialOverflow";
    case Errc::BlowUp: return "BlowUp";
    case Errc::BadArgument: return "BadArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace fredhier

#endif
