#ifndef ADMGAUG_ERROR_HPP
#define ADMGAUG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace admgaug {

enum class Errc {
    // input parsing (graph, SEM, CSV, model files)
    ParseError,
    // graph / data validation
    CyclicGraph,
    UnknownVertex,
    SelfLoop,
    DegenerateColumn,
    MissingBandwidth,
    PlanGraphMismatch,
    InvalidArgument,
    TooLarge,
    LambdaOutOfRange,
    DimensionMismatch,
    EmptyData,
    // augmentation resource guard
    NodeCapExceeded,
    // learner
    NoPositiveWeight,
    DegenerateConfig,
    TooFewSamples,
    // filesystem
    IoError,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Process exit status for an error class: 2 parse, 3 validation, 4 node cap, 5 learner, 1 I/O.
int exit_code_for(Errc code) noexcept;

}  // namespace admgaug

#endif  // ADMGAUG_ERROR_HPP
