#include "cowm/record.hpp"

#include <charconv>

namespace cowm {

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw RunError("format_double: conversion failed");
    return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw RunError("CsvWriter: cannot open " + path.string());
    if (header.empty()) throw ConfigError("CsvWriter: header row is mandatory");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
        throw ShapeError("CsvWriter: " + std::to_string(cells.size()) + " cells for " +
                         std::to_string(columns_) + " columns");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

void CsvWriter::close() {
    if (out_.is_open()) out_.close();
}

}  // namespace cowm
