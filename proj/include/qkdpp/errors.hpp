#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qkdpp {

// Base for every library error so callers can catch the whole hierarchy at once.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand shapes or index ranges do not line up (vector/matrix sizes, block lengths).
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

// A matrix that must have full row rank does not.
class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& what) : Error(what) {}
};

// A degree specification cannot be realized by any bipartite graph.
class InfeasibleSpec : public Error {
public:
    explicit InfeasibleSpec(const std::string& what) : Error(what) {}
};

// The randomized graph construction exhausted its restart budget.
class ConstructionFailed : public Error {
public:
    explicit ConstructionFailed(const std::string& what) : Error(what) {}
};

// A file does not follow the expected grammar; carries the 1-based offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Parsed data is self-contradictory (e.g. row and column adjacency disagree).
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& what) : Error(what) {}
};

// Syndrome sets come from different code families and cannot be compared.
class FamilyMismatch : public Error {
public:
    explicit FamilyMismatch(const std::string& what) : Error(what) {}
};

// A sampling-based estimate was requested with no sampled positions.
class EmptySample : public Error {
public:
    explicit EmptySample(const std::string& what) : Error(what) {}
};

// Channel error rate outside the open interval (0, 0.5).
class InvalidErrorRate : public Error {
public:
    explicit InvalidErrorRate(const std::string& what) : Error(what) {}
};

// Binary entropy of the error rate is zero, so efficiency is undefined.
class ZeroEntropy : public Error {
public:
    explicit ZeroEntropy(const std::string& what) : Error(what) {}
};

// A file or directory could not be opened, read, or written.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// Command-line level misuse that is not a parser syntax error.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

} // namespace qkdpp
