#include "heintze/io.hpp"

#include "heintze/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace heintze {

namespace {

std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << col;
    return os.str();
}

}  // namespace

MatrixSpec parse_matrix_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("matrix JSON syntax error at " + line_col(text, e.byte));
    }
    if (!doc.is_object() || !doc.contains("rows")) throw ParseError("matrix JSON must be an object with a \"rows\" array");
    const auto& rows = doc["rows"];
    if (!rows.is_array() || rows.empty()) throw ParseError("\"rows\" must be a non-empty array");
    const std::size_t n = rows.size();
    std::vector<std::vector<double>> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        if (!row.is_array()) throw ParseError("matrix row " + std::to_string(i + 1) + " is not an array");
        if (row.size() != n) {
            throw ParseError("matrix row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                             " entries, expected " + std::to_string(n));
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!row[j].is_number()) {
                throw ParseError("matrix row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1) +
                                 ": expected a number");
            }
            values[i].push_back(row[j].get<double>());
        }
    }
    try {
        return MatrixSpec::from_rows(values);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

MatrixSpec load_matrix(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_matrix_json(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string matrix_to_json(const MatrixSpec& m) {
    nlohmann::json doc;
    doc["rows"] = m.rows();
    return doc.dump();
}

Vec parse_vector_csv(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string field(text.substr(pos, comma - pos));
        // trim
        const auto b = field.find_first_not_of(" \t");
        const auto e = field.find_last_not_of(" \t");
        field = b == std::string::npos ? std::string{} : field.substr(b, e - b + 1);
        double v = 0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
            throw ParseError("cannot parse '" + field + "' as a real number in \"" + std::string(text) + "\"");
        }
        out.push_back(v);
        pos = comma + 1;
    }
    return Eigen::Map<Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace heintze
