#pragma once

#include <stdexcept>
#include <string>

namespace tubal {

// Base of all library errors. The three categories below map onto the CLI
// exit codes: validation/config/file problems exit 2, numerical failures
// exit 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

#define TUBAL_DEFINE_ERROR(NAME, BASE)                    \
    class NAME : public BASE {                            \
    public:                                               \
        explicit NAME(const std::string& msg) : BASE(std::string(#NAME ": ") + msg) {} \
    }

TUBAL_DEFINE_ERROR(ShapeMismatch, ValidationError);
TUBAL_DEFINE_ERROR(InvalidArgument, ValidationError);
TUBAL_DEFINE_ERROR(OracleTooLarge, ValidationError);
TUBAL_DEFINE_ERROR(OutOfBudget, ValidationError);
TUBAL_DEFINE_ERROR(NotSymmetric, ValidationError);
TUBAL_DEFINE_ERROR(NotPsd, ValidationError);
TUBAL_DEFINE_ERROR(RankTooSmall, ValidationError);
TUBAL_DEFINE_ERROR(RankMismatch, ValidationError);
TUBAL_DEFINE_ERROR(ZeroTensor, ValidationError);
TUBAL_DEFINE_ERROR(InsufficientData, ValidationError);

TUBAL_DEFINE_ERROR(NonRealResult, NumericalError);
TUBAL_DEFINE_ERROR(Diverged, NumericalError);
TUBAL_DEFINE_ERROR(SandwichViolated, NumericalError);

TUBAL_DEFINE_ERROR(BadMagic, IoError);
TUBAL_DEFINE_ERROR(TruncatedFile, IoError);
TUBAL_DEFINE_ERROR(ShapeOverflow, IoError);

#undef TUBAL_DEFINE_ERROR

}  // namespace tubal
