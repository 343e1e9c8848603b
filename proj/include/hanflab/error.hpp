#pragma once

#include <stdexcept>
#include <string>

namespace hanflab {

// All recoverable failures carry a stable machine-readable code next to the
// human message; the CLI surfaces the code in json mode.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

inline Error input_error(const std::string& message) { return Error("input", message); }
inline Error usage_error(const std::string& message) { return Error("usage", message); }
inline Error signature_mismatch(const std::string& message) { return Error("signature-mismatch", message); }
inline Error out_of_class(const std::string& message) { return Error("out-of-class", message); }
inline Error budget_exceeded(const std::string& message) { return Error("budget-exceeded", message); }
inline Error not_invariant(const std::string& message) { return Error("not-invariant", message); }

} // namespace hanflab
