#pragma once

#include <stdexcept>
#include <string>

namespace nastylink {

// Unknown mention/entity identifier in a lookup.
struct LookupError : std::runtime_error {
    explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data (bad lines, duplicates, dangling references).
struct IngestError : std::runtime_error {
    explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration (out-of-range thresholds, dimension mismatch).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failure.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was called outside its contract (e.g. self-loop affinity query).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nastylink
