#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace copycat {

// Shape of an input does not match what a layer or endpoint expects.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Loss went non-finite during training; message names epoch and batch.
struct TrainingDiverged : std::runtime_error {
    TrainingDiverged(int epoch, int batch, const std::string& what)
        : std::runtime_error(what), epoch(epoch), batch(batch) {}
    int epoch;
    int batch;
};

// File-format errors carry the failing byte offset and a machine-checkable kind.
struct ParseError : std::runtime_error {
    ParseError(std::string kind, std::size_t offset, const std::string& what)
        : std::runtime_error(what), kind(std::move(kind)), offset(offset) {}
    std::string kind;  // "bad_magic" | "truncated" | "count_mismatch" | "bad_header"
    std::size_t offset;
};

struct QuotaExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConnectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remote oracle rejected the request (relayed error code in `code`).
struct ProtocolError : std::runtime_error {
    ProtocolError(std::string code, const std::string& what)
        : std::runtime_error(what), code(std::move(code)) {}
    std::string code;
};

struct EmptyFakeDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A class index never occurs in the label vector handed to macro_accuracy.
struct UndefinedClass : std::runtime_error {
    UndefinedClass(int class_index, const std::string& what)
        : std::runtime_error(what), class_index(class_index) {}
    int class_index;
};

struct DivisionDomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace copycat
