#pragma once

#include <stdexcept>
#include <string>

namespace pulseline {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- frames / generator ---
class DegenerateFrame : public Error { public: using Error::Error; };
class InvalidFactor   : public Error { public: using Error::Error; };
class OutOfBand       : public Error { public: using Error::Error; };

// --- dsp ---
class InvalidWindow     : public Error { public: using Error::Error; };
class InvalidTaps       : public Error { public: using Error::Error; };
class NotAPeak          : public Error { public: using Error::Error; };
class InsufficientPeaks : public Error { public: using Error::Error; };

// --- nn / training ---
class ShapeError       : public Error { public: using Error::Error; };
class TrainingDiverged : public Error { public: using Error::Error; };

// --- data / metrics / config ---
class DataError   : public Error { public: using Error::Error; };
class MetricError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// --- model file loading; each failure mode is its own type ---
class ModelIoError : public Error { public: using Error::Error; };
class BadMagic          : public ModelIoError { public: using ModelIoError::ModelIoError; };
class TruncatedPayload  : public ModelIoError { public: using ModelIoError::ModelIoError; };
class ShapeInconsistency: public ModelIoError { public: using ModelIoError::ModelIoError; };
class CrcMismatch       : public ModelIoError { public: using ModelIoError::ModelIoError; };

} // namespace pulseline
