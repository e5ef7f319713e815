#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace sqglab {

/// Locale-independent formatting, 17 significant digits.
std::string format_number(double v);

/// CSV sink that streams to "<path>.partial" and renames on close, so a
/// killed run never leaves a bare truncated file behind.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();

    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);
    void close();

private:
    std::string path_;
    std::string tmp_path_;
    std::ofstream os_;
    bool closed_ = false;
};

/// Write text atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace sqglab
