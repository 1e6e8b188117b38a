#ifndef FAT_ERRORS_HPP
#define FAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fat {

// Error taxonomy mirrors the CLI exit codes: usage 1, config/parse 2,
// simulation invariant 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class SimError : public Error {
public:
    explicit SimError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw SimError(msg);
}

inline void require_config(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

}  // namespace fat

#endif
