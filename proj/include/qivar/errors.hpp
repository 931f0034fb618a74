#pragma once

#include <stdexcept>
#include <string>

namespace qivar {

// Error taxonomy mirrors the CLI exit codes: configuration problems,
// malformed or inconsistent input data, and numerical failures inside
// the fitting routines.

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qivar
