#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace calm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value lies outside the range its definition allows (negative shock, fraction > 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inputs are individually valid but do not fit together (missing table entry, dangling reference).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Shape of the data is wrong: duplicate ids, wrong number of equity positions, date mismatch.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Raised by the file loaders. Carries every problem found, not just the first.
class ParseError : public Error {
public:
    ParseError(std::string file, std::vector<std::string> diagnostics)
        : Error(format(file, diagnostics)), file_(std::move(file)),
          diagnostics_(std::move(diagnostics)) {}

    const std::string& file() const noexcept { return file_; }
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    static std::string format(const std::string& file, const std::vector<std::string>& diags) {
        std::string out = file + ": " + std::to_string(diags.size()) + " error(s)";
        for (const auto& d : diags) out += "\n  " + d;
        return out;
    }

    std::string file_;
    std::vector<std::string> diagnostics_;
};

}  // namespace calm
