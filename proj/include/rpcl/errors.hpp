#ifndef RPCL_ERRORS_HPP
#define RPCL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rpcl {

// Base class for every error the library throws. Specific types below are
// part of the module contracts; tests match on them.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shapes of two operands are incompatible.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A NaN/Inf reached an operation that requires finite input, or an
// intermediate became non-finite.
class NumericError : public Error {
public:
    using Error::Error;
};

// A matrix handed to the SPD factorization is not numerically positive
// definite. Signals the conditioning pathology of ill-posed recursive
// updates; callers decide whether it is fatal.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

// Cosine similarity asked for a column with (near-)zero norm.
class DegenerateColumn : public Error {
public:
    using Error::Error;
};

// A class id was registered twice with the incremental classifier.
class DuplicateClass : public Error {
public:
    using Error::Error;
};

// Accuracy grid is missing entries required by a metric.
class IncompleteGrid : public Error {
public:
    using Error::Error;
};

// Metric undefined for the given stage count (f_avg with T < 2).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

// --- file format errors -----------------------------------------------------

class BadMagic : public Error {
public:
    using Error::Error;
};

class TruncatedFile : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// --- configuration errors ---------------------------------------------------

class UnknownKey : public Error {
public:
    using Error::Error;
};

class MalformedValue : public Error {
public:
    using Error::Error;
};

class IndivisibleSplit : public Error {
public:
    using Error::Error;
};

}  // namespace rpcl

#endif  // RPCL_ERRORS_HPP
