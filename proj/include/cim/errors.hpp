#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cim/model.hpp"

namespace cim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed document or query text; positions are 1-based.
struct ParseError : Error {
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(message + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line(line),
          column(column) {}
    std::size_t line;
    std::size_t column;
};

/// CSV ingestion failure; `line` is the 1-based physical line (header is line 1).
struct LoadError : Error {
    LoadError(const std::string& message, std::size_t line)
        : Error(line ? message + " (line " + std::to_string(line) + ")" : message), line(line) {}
    std::size_t line;
};

/// Ill-typed plan or evaluation against missing data.
struct PlanError : Error {
    using Error::Error;
};

struct CompileError : Error {
    explicit CompileError(std::vector<Diagnostic> diagnostics)
        : Error(summarize(diagnostics)), diagnostics(std::move(diagnostics)) {}
    std::vector<Diagnostic> diagnostics;

private:
    static std::string summarize(const std::vector<Diagnostic>& ds) {
        std::string s = "view compilation failed";
        for (const auto& d : ds) s += "\n  " + to_string(d);
        return s;
    }
};

/// Query resolution or rewrite failure. `code` is one of the API error codes
/// (unresolved-name, unmapped-level, ambiguous-path, invalid-query).
struct QueryError : Error {
    QueryError(std::string code, const std::string& message, std::vector<std::string> candidates = {})
        : Error(message), code(std::move(code)), candidates(std::move(candidates)) {}
    std::string code;
    std::vector<std::string> candidates;
};

}  // namespace cim
