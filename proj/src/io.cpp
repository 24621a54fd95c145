#include "normest/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace normest::io {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_number(std::string_view field, double& out) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    if (field.empty()) return false;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

void write_json(std::ostringstream& os, const nlohmann::json& j, int indent, int depth) {
    const auto newline = [&](int level) {
        if (indent < 0) return;
        os << '\n' << std::string(static_cast<std::size_t>(indent * level), ' ');
    };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{';
            bool first = true;
            // nlohmann::json objects are std::map backed: iteration is key-sorted.
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',';
                first = false;
                newline(depth + 1);
                os << nlohmann::json(it.key()).dump() << (indent < 0 ? ":" : ": ");
                write_json(os, it.value(), indent, depth + 1);
            }
            newline(depth);
            os << '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << '[';
            bool first = true;
            for (const auto& el : j) {
                if (!first) os << ',';
                first = false;
                newline(depth + 1);
                write_json(os, el, indent, depth + 1);
            }
            newline(depth);
            os << ']';
            return;
        }
        case nlohmann::json::value_t::number_float: {
            const double x = j.get<double>();
            if (std::isfinite(x)) {
                os << format_double(x);
            } else {
                os << '"' << format_double(x) << '"';
            }
            return;
        }
        default:
            os << j.dump();
    }
}

}  // namespace

RowMatrix parse_csv(std::string_view text, std::string_view source) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool seen_first = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto fields = split_fields(line);
        std::vector<double> values(fields.size());
        std::size_t bad = fields.size();
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (!parse_number(fields[k], values[k])) {
                bad = k;
                break;
            }
        }
        if (!seen_first) {
            seen_first = true;
            width = fields.size();
            if (bad != fields.size()) continue;  // header row
        }
        if (bad != fields.size()) {
            throw ParseError(std::string(source) + ": row " + std::to_string(line_no) + ", field " +
                             std::to_string(bad + 1) + ": not a number: '" +
                             std::string(trim(fields[bad])) + "'");
        }
        if (fields.size() != width) {
            throw ParseError(std::string(source) + ": row " + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " fields, found " +
                             std::to_string(fields.size()));
        }
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (!std::isfinite(values[k])) {
                throw ParseError(std::string(source) + ": row " + std::to_string(line_no) +
                                 ", field " + std::to_string(k + 1) + ": non-finite value");
            }
        }
        rows.push_back(std::move(values));
        if (end == text.size()) break;
    }
    if (rows.empty()) throw ParseError(std::string(source) + ": no numeric rows");
    RowMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < width; ++k) {
            out(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
        }
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RowMatrix read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path), path.string());
}

Vector read_csv_vector(const std::filesystem::path& path) {
    const RowMatrix m = read_csv(path);
    if (m.rows() == 1) return m.row(0).transpose();
    if (m.cols() == 1) return m.col(0);
    throw ParseError(path.string() + ": expected a single row or a single column");
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string dump_stable(const nlohmann::json& value, int indent) {
    std::ostringstream os;
    write_json(os, value, indent, 0);
    return os.str();
}

nlohmann::json to_json(const Eigen::Ref<const Vector>& v) {
    auto arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const nlohmann::json& j, std::string_view field) {
    if (!j.is_array()) throw ParseError(std::string(field) + ": expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw ParseError(std::string(field) + "[" + std::to_string(i) + "]: expected a number");
        }
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

}  // namespace normest::io
