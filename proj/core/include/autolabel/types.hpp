#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace autolabel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all library failures. The CLI maps subclasses to exit
/// codes: InputError -> 2, ContractError -> 3, TrainingError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed user input, including invalid configuration.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class FormatError : public InputError {
public:
    using InputError::InputError;
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

/// A caller violated an API precondition (mismatched shapes or lengths).
class ContractError : public Error {
public:
    using Error::Error;
};

class ShapeError : public ContractError {
public:
    using ContractError::ContractError;
};

/// Numerical breakdown while fitting or scoring (divergence, singular
/// covariance and the like).
class TrainingError : public Error {
public:
    using Error::Error;
};

class NumericError : public TrainingError {
public:
    using TrainingError::TrainingError;
};

}  // namespace autolabel
