#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace drift {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Git subprocess failure; carries the captured stderr verbatim.
class GitError : public Error {
public:
    GitError(const std::string& what, std::string stderr_text, int exit_code)
        : Error(what + (stderr_text.empty() ? "" : ": " + stderr_text)),
          stderr_(std::move(stderr_text)), exit_code_(exit_code) {}

    const std::string& stderr_text() const noexcept { return stderr_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    std::string stderr_;
    int exit_code_;
};

class ServiceError : public Error {
public:
    using Error::Error;
};

} // namespace drift
