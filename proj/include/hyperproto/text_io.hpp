#ifndef HYPERPROTO_TEXT_IO_HPP
#define HYPERPROTO_TEXT_IO_HPP

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hyperproto::text {

// Shortest form that still carries 17 significant digits ("%.17g").
std::string format_double(double value);

std::string_view trim(std::string_view s);

// Splits on commas; no quoting. Fields are trimmed.
std::vector<std::string> split_csv(std::string_view line);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_integer(std::string_view s);

// Reads the next non-blank line, stripping a trailing '\r'. Tracks 1-based line numbers.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line);
    std::size_t line_number() const noexcept { return line_number_; }

private:
    std::istream& in_;
    std::size_t line_number_ = 0;
};

// Parses "key=value key2=value2" header lines.
std::optional<std::string> header_field(std::string_view line, std::string_view key);

}  // namespace hyperproto::text

#endif  // HYPERPROTO_TEXT_IO_HPP
