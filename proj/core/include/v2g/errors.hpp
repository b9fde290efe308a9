#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace v2g {

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time_h)
        : std::runtime_error(what), time_h_(time_h) {}
    [[nodiscard]] double time_h() const { return time_h_; }

private:
    double time_h_;
};

/// A session whose energy target cannot be met under its power and energy bounds.
class InfeasibleSession : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every violation found while validating a configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace v2g
