#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fanfold {

// Categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
    contract = 1,
    parse = 2,
    configuration = 3,
    phase_order = 4,
    numeric_fault = 5,
    undefined_metric = 6,
    determinism = 7,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

// Missing file, malformed dataset, or bad token. line == 0 means "whole file".
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(ErrorKind::parse, format(file, line, what)), file_(file), line_(line) {}
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& file, std::size_t line, const std::string& what) {
        return line == 0 ? file + ": " + what : file + ":" + std::to_string(line) + ": " + what;
    }
    std::string file_;
    std::size_t line_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::configuration, what) {}
};

class PhaseOrderError : public Error {
public:
    explicit PhaseOrderError(const std::string& what) : Error(ErrorKind::phase_order, what) {}
};

class NumericFault : public Error {
public:
    explicit NumericFault(const std::string& what) : Error(ErrorKind::numeric_fault, what) {}
};

// Loss went non-finite during a training phase.
class TrainingFault : public NumericFault {
public:
    TrainingFault(const std::string& phase, std::size_t epoch, const std::string& what)
        : NumericFault(phase + " training diverged at epoch " + std::to_string(epoch) + ": " + what),
          epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

class UndefinedMetricError : public Error {
public:
    explicit UndefinedMetricError(const std::string& what) : Error(ErrorKind::undefined_metric, what) {}
};

class DeterminismError : public Error {
public:
    explicit DeterminismError(const std::string& what) : Error(ErrorKind::determinism, what) {}
};

}  // namespace fanfold
