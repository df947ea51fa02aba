#ifndef KWX_ERRORS_HPP
#define KWX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kwx {

// Error categories map to CLI exit codes:
//   validation_error -> 2, data_error -> 3, numeric_error -> 4
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, bad config, violated preconditions.
class precondition_error : public validation_error {
public:
    explicit precondition_error(const std::string& msg) : validation_error(msg) {}
};

class parameter_error : public validation_error {
public:
    explicit parameter_error(const std::string& msg) : validation_error(msg) {}
};

// Unreadable files, malformed records, inconsistent inputs.
class io_error : public data_error {
public:
    explicit io_error(const std::string& msg) : data_error(msg) {}
};

class parse_error : public data_error {
public:
    explicit parse_error(const std::string& msg) : data_error(msg) {}
};

class integrity_error : public data_error {
public:
    explicit integrity_error(const std::string& msg) : data_error(msg) {}
};

// Algorithms that fail to produce a usable result.
class convergence_error : public numeric_error {
public:
    explicit convergence_error(const std::string& msg) : numeric_error(msg) {}
};

class degenerate_error : public numeric_error {
public:
    explicit degenerate_error(const std::string& msg) : numeric_error(msg) {}
};

} // namespace kwx

#endif
