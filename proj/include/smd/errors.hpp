#ifndef SMD_ERRORS_HPP
#define SMD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smd {

/// Invalid inputs or configuration (CLI exit code 1).
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure: ill-conditioning, censoring, residual floor (CLI exit code 2).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

class ill_conditioned_error : public numerical_error {
public:
    ill_conditioned_error(const std::string& msg, double condition)
        : numerical_error(msg), condition_estimate(condition) {}
    double condition_estimate;
};

/// Raised by the optimizer when the bracket test finds no interior minimum
/// (CLI exit code 3). Monotone objectives are valid physics, not a crash.
class no_interior_minimum : public std::runtime_error {
public:
    explicit no_interior_minimum(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace smd

#endif  // SMD_ERRORS_HPP
