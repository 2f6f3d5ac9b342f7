#include "fast2/csv.hpp"

#include <fstream>
#include <sstream>

#include "fast2/errors.hpp"

namespace fast2 {

std::vector<CsvRow> parse_csv(std::string_view text)
{
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.remove_prefix(3);
    }
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        if (row_has_content) {
            rows.push_back(std::move(row));
        }
        row.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            row_has_content = true;
            break;
        case ',':
            end_field();
            row_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(c);
            row_has_content = true;
        }
    }
    if (in_quotes) {
        throw IntegrityError("csv: unterminated quoted field");
    }
    if (row_has_content || !field.empty()) {
        end_row();
    }
    return rows;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<CsvRow> read_csv_file(const std::filesystem::path& path)
{
    return parse_csv(read_file(path));
}

std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string csv_line(const CsvRow& row)
{
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) {
            line.push_back(',');
        }
        line += csv_escape(row[i]);
    }
    line.push_back('\n');
    return line;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

}  // namespace fast2
