#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace searchsynth {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SourcePos {
    std::size_t line = 0;
    std::size_t column = 0;
};

class ParseError : public Error {
public:
    ParseError(SourcePos pos, const std::string& message)
        : Error("parse error at " + std::to_string(pos.line) + ":" +
                std::to_string(pos.column) + ": " + message),
          pos_(pos) {}

    SourcePos pos() const { return pos_; }

private:
    SourcePos pos_;
};

class SemanticError : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

class UnboundVariable : public Error {
public:
    using Error::Error;
};

class EmptyKnowledge : public Error {
public:
    using Error::Error;
};

class PathExplosion : public Error {
public:
    using Error::Error;
};

class NoWorthwhileQuery : public Error {
public:
    using Error::Error;
};

class RoundLimitExceeded : public Error {
public:
    using Error::Error;
};

class InvalidOutcome : public Error {
public:
    using Error::Error;
};

class OracleTimeout : public Error {
public:
    using Error::Error;
};

class OracleExhausted : public Error {
public:
    using Error::Error;
};

class CorpusError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

} // namespace searchsynth
