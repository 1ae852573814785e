#include <regpath/csv.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <regpath/error.hpp>
#include <regpath/serialize.hpp>

namespace regpath {
namespace {

// Splits one record; `pos` advances past the record's line break.
std::vector<std::string> next_record(const std::string& text, std::size_t& pos, std::size_t line)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    while (pos < text.size()) {
        const char ch = text[pos];
        if (quoted) {
            if (ch == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field += '"';
                    pos += 2;
                    continue;
                }
                quoted = false;
                ++pos;
                continue;
            }
            field += ch;
            ++pos;
            continue;
        }
        if (ch == '"' && field.empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
            ++pos;
            continue;
        }
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
            was_quoted = false;
            ++pos;
            continue;
        }
        if (ch == '\r' || ch == '\n') {
            if (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            fields.push_back(field);
            return fields;
        }
        field += ch;
        ++pos;
    }
    if (quoted) throw Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": unterminated quote");
    fields.push_back(field);
    return fields;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace

Eigen::Index CsvTable::column(const std::string& name) const
{
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return static_cast<Eigen::Index>(j);
    }
    throw Error(ErrorKind::missing_column, "column \"" + name + "\" not found");
}

CsvTable parse_csv(const std::string& text)
{
    std::size_t pos = 0;
    if (text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;
    std::size_t line = 1;
    CsvTable table;
    if (pos >= text.size()) throw Error(ErrorKind::parse_error, "empty file: a header row is required");
    for (const std::string& h : next_record(text, pos, line)) table.header.push_back(trim(h));
    const std::size_t width = table.header.size();

    std::vector<std::vector<double>> rows;
    while (pos < text.size()) {
        ++line;
        const std::vector<std::string> fields = next_record(text, pos, line);
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != width) {
            throw Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": expected " +
                                                    std::to_string(width) + " fields, found " +
                                                    std::to_string(fields.size()));
        }
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j) {
            const std::string f = trim(fields[j]);
            const std::string where =
                "line " + std::to_string(line) + ", column " + std::to_string(j + 1) + " (" + table.header[j] + ")";
            if (f.empty()) throw Error(ErrorKind::parse_error, where + ": empty field");
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(f.c_str(), &end);
            if (end != f.c_str() + f.size()) {
                throw Error(ErrorKind::parse_error, where + ": \"" + f + "\" is not a number");
            }
            if (!std::isfinite(v)) throw Error(ErrorKind::non_finite_value, where + ": non-finite value");
            row[j] = v;
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return table;
}

CsvTable read_csv(const std::string& filename)
{
    return parse_csv(read_text_file(filename));
}

Dataset table_to_dataset(const CsvTable& table, const std::string& response,
                         const std::vector<std::string>& features, Task task)
{
    const Eigen::Index ycol = table.column(response);
    std::vector<std::string> names = features;
    if (names.empty()) {
        for (const std::string& h : table.header) {
            if (h != response) names.push_back(h);
        }
    }
    if (names.empty()) throw Error(ErrorKind::missing_column, "no feature columns besides \"" + response + "\"");
    if (table.values.rows() == 0) throw Error(ErrorKind::empty_dataset, "file has no data rows");
    Eigen::MatrixXd x(table.values.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = table.values.col(table.column(names[j]));
    Eigen::VectorXd y = table.values.col(ycol);
    if (task == Task::classification) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (y(i) != 1.0 && y(i) != -1.0) {
                throw Error(ErrorKind::label_domain, "line " + std::to_string(i + 2) + ": label " +
                                                         std::to_string(y(i)) + " is not -1 or 1");
            }
        }
    }
    return make_dataset(std::move(x), std::move(y), task, std::move(names));
}

Dataset load_csv(const std::string& filename, const std::string& response,
                 const std::vector<std::string>& features, Task task)
{
    return table_to_dataset(read_csv(filename), response, features, task);
}

std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& values)
{
    std::ostringstream out;
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << "\n";
    char buf[32];
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace regpath
