#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tcnas {

// All library failures carry a stable machine-readable code (e.g. "BadMagic",
// "InvalidSpec") plus a human message. The CLI prints "error(<code>): <msg>".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error("[" + code + "] " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
    throw Error(code, message);
}

} // namespace tcnas
