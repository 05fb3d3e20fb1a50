#include "ecoroute/csvio.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace ecoroute {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

} // namespace

CsvReader::CsvReader(const std::string& path, char delim)
    : path_(path), in_(path), delim_(delim) {
    if (!in_.is_open())
        throw std::runtime_error("cannot open file: " + path);
}

bool CsvReader::read_raw(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        fields.clear();
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, delim_)) fields.push_back(trim(field));
        if (!line.empty() && line.back() == delim_) fields.emplace_back();
        return true;
    }
    return false;
}

bool CsvReader::next_row(std::vector<std::string>& fields) {
    if (!header_checked_) {
        header_checked_ = true;
        if (!read_raw(fields)) return false;
        if (!fields.empty() && !looks_numeric(fields[0])) {
            header_ = fields;
            return read_raw(fields);
        }
        return true;
    }
    return read_raw(fields);
}

double CsvReader::field_double(const std::vector<std::string>& fields, std::size_t i) const {
    if (i >= fields.size()) fail("missing field " + std::to_string(i + 1));
    const std::string& s = fields[i];
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        fail("not a number: '" + s + "'");
    return v;
}

std::int64_t CsvReader::field_int(const std::vector<std::string>& fields, std::size_t i) const {
    if (i >= fields.size()) fail("missing field " + std::to_string(i + 1));
    const std::string& s = fields[i];
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        fail("not an integer: '" + s + "'");
    return v;
}

void CsvReader::fail(const std::string& what) const {
    throw ParseError(path_, line_, what);
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

std::string join_row(const std::vector<std::string>& fields, char delim) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(delim);
        out += fields[i];
    }
    out.push_back('\n');
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

} // namespace ecoroute
