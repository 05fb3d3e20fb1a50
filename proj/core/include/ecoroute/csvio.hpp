#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace ecoroute {

// Thrown by loaders on malformed rows; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reads a delimited text file row by row. Skips blank lines and lines
// starting with '#'. The first non-comment line is treated as a header when
// its first field is non-numeric; callers get data rows only.
class CsvReader {
public:
    explicit CsvReader(const std::string& path, char delim = ',');

    // Returns false at EOF. Fields are trimmed of surrounding whitespace.
    bool next_row(std::vector<std::string>& fields);

    int line_number() const { return line_; }
    const std::string& path() const { return path_; }
    const std::vector<std::string>& header() const { return header_; }

    double field_double(const std::vector<std::string>& fields, std::size_t i) const;
    std::int64_t field_int(const std::vector<std::string>& fields, std::size_t i) const;
    [[noreturn]] void fail(const std::string& what) const;

private:
    std::string path_;
    std::ifstream in_;
    char delim_;
    int line_ = 0;
    bool header_checked_ = false;
    std::vector<std::string> header_;
    bool read_raw(std::vector<std::string>& fields);
};

// Deterministic, locale-independent formatting (std::to_chars shortest form).
std::string format_double(double v);

// One output row; fields are joined with the delimiter, no quoting (field
// content in this project never contains delimiters).
std::string join_row(const std::vector<std::string>& fields, char delim = ',');

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace ecoroute
