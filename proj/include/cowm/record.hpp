#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cowm/errors.hpp"

namespace cowm {

// Locale-independent shortest-round-trip decimal rendering ('.' decimal
// point, deterministic bytes for a given double).
std::string format_double(double v);

// CSV with a mandatory header row; cells rendered via format_double.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& cells);
    void close();

    static std::string cell(double v) { return format_double(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }

private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace cowm
