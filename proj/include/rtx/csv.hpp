#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rtx {

// Shortest round-trip decimal form ('.' separator, no locale), "nan", "inf".
std::string format_number(double v);

// RFC-4180 quoting: fields holding a comma, quote or line break are quoted
// and inner quotes doubled. Lines end in '\n'.
std::string csv_escape(const std::string& field);

class CsvTable {
public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Minimal reader for files written by CsvTable (quoted fields allowed).
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace rtx
