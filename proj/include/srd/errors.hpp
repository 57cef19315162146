#pragma once

#include <stdexcept>

namespace srd {

/// A caller violated a documented precondition (dimension mismatch,
/// parameter out of range, malformed input).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The numerics broke down: a vanishing normalisation, a singular system,
/// an iteration that did not converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Valid input that a particular algorithm does not handle
/// (e.g. a grid oracle asked for a dimension it cannot afford).
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace srd
