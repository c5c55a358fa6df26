// Error types shared across the engine. Each maps to a CLI exit code:
// usage=1, io=2, shape/domain=3, numeric=4.

#ifndef PANLUT_ERROR_HPP
#define PANLUT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace panlut {

class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace panlut

#endif
