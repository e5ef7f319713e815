#include "sqglab/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace sqglab {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), tmp_path_(path + ".partial"), os_(tmp_path_, std::ios::trunc) {
    if (!os_) throw std::runtime_error("CsvWriter: cannot open " + tmp_path_);
    for (std::size_t i = 0; i < header.size(); ++i)
        os_ << (i ? "," : "") << header[i];
    os_ << "\n";
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
    }
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        os_ << (i ? "," : "") << format_number(values[i]);
    os_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { os_ << line << "\n"; }

void CsvWriter::close() {
    if (closed_) return;
    os_.flush();
    os_.close();
    if (!os_) throw std::runtime_error("CsvWriter: write failed for " + tmp_path_);
    std::filesystem::rename(tmp_path_, path_);
    closed_ = true;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".partial";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("write_file_atomic: cannot open " + tmp);
        os << content;
        os.flush();
        if (!os) throw std::runtime_error("write_file_atomic: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace sqglab
