#include "admgaug/error.hpp"

namespace admgaug {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::ParseError: return "ParseError";
        case Errc::CyclicGraph: return "CyclicGraph";
        case Errc::UnknownVertex: return "UnknownVertex";
        case Errc::SelfLoop: return "SelfLoop";
        case Errc::DegenerateColumn: return "DegenerateColumn";
        case Errc::MissingBandwidth: return "MissingBandwidth";
        case Errc::PlanGraphMismatch: return "PlanGraphMismatch";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::TooLarge: return "TooLarge";
        case Errc::LambdaOutOfRange: return "LambdaOutOfRange";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyData: return "EmptyData";
        case Errc::NodeCapExceeded: return "NodeCapExceeded";
        case Errc::NoPositiveWeight: return "NoPositiveWeight";
        case Errc::DegenerateConfig: return "DegenerateConfig";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

int exit_code_for(Errc code) noexcept {
    switch (code) {
        case Errc::ParseError:
            return 2;
        case Errc::NodeCapExceeded:
            return 4;
        case Errc::NoPositiveWeight:
        case Errc::DegenerateConfig:
        case Errc::TooFewSamples:
            return 5;
        case Errc::IoError:
            return 1;
        default:
            return 3;
    }
}

}  // namespace admgaug
