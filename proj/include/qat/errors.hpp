#pragma once

#include <stdexcept>
#include <string>

namespace qat {

// Every library failure derives from Error so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define QAT_DEFINE_ERROR(Name)                        \
    struct Name : Error {                             \
        explicit Name(const std::string& what_arg)    \
            : Error(#Name ": " + what_arg) {}         \
    }

QAT_DEFINE_ERROR(NonFiniteCoefficient);
QAT_DEFINE_ERROR(IntegrationFailure);
QAT_DEFINE_ERROR(QuadratureFailure);
QAT_DEFINE_ERROR(GridMismatch);
QAT_DEFINE_ERROR(SupportOverflow);
QAT_DEFINE_ERROR(OutsideWindow);
QAT_DEFINE_ERROR(TimeNotInImage);
QAT_DEFINE_ERROR(InsufficientSamples);
QAT_DEFINE_ERROR(ForcedNotSupported);
QAT_DEFINE_ERROR(NotUnimodular);
QAT_DEFINE_ERROR(SolverDivergence);
QAT_DEFINE_ERROR(ComplexOmegaTilde);
QAT_DEFINE_ERROR(RealOmegaTilde);
QAT_DEFINE_ERROR(AccuracyLoss);
QAT_DEFINE_ERROR(InvalidArgument);

#undef QAT_DEFINE_ERROR

}  // namespace qat
