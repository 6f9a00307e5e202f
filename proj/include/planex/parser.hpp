#ifndef PLANEX_PARSER_HPP
#define PLANEX_PARSER_HPP

#include <optional>
#include <string>
#include <vector>

#include "planex/domain.hpp"

namespace planex {

// Half-open byte range [byte_start, byte_end) with 1-based line and column
// (column counts bytes within the line).
struct SourceSpan {
    int line = 0;
    int column = 0;
    std::size_t byte_start = 0;
    std::size_t byte_end = 0;
};

struct ParseError {
    enum class Kind { Syntax, UnknownProposition, BadProbability, DuplicateName };

    Kind kind = Kind::Syntax;
    std::string message;
    SourceSpan span;
};

struct ParseResult {
    std::optional<DomainSpec> domain; // set only when errors is empty
    std::vector<ParseError> errors;

    bool ok() const { return errors.empty(); }
};

// Parses the line-oriented domain format. Errors are collected, not
// fail-fast: a bad line is reported and skipped so later lines still get
// checked. On success the returned domain already includes the implicit
// "noop" action.
ParseResult parse_domain(const std::string& text);

// Canonical form: discount, props, rewards, actions, init, goal, with
// literals ordered by declaration index and numbers in shortest
// round-trippable decimal form. parse_domain(serialize_domain(d)) == d.
std::string serialize_domain(const DomainSpec& d);

// Reads and parses a file. IO failures are reported as a Syntax error with a
// zero span.
ParseResult load_domain_file(const std::string& path);

std::string format_parse_error(const ParseError& e);

} // namespace planex

#endif
