#pragma once

#include <stdexcept>
#include <string>

namespace rmnc {

// Parameter outside the domain where an operation is defined (CLI exit code 2).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure did not reach its target accuracy.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}

    [[nodiscard]] double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace rmnc
