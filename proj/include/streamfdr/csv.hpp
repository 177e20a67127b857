#pragma once

#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace streamfdr {

struct SeriesCsv {
    std::vector<double> values;
    std::vector<int> labels;
    bool has_labels{false};
};

// Parses `t,value[,label]` with an optional header line. Errors carry the
// offending line number.
inline SeriesCsv read_series_csv(std::istream& is) {
    SeriesCsv out;
    std::string line;
    long long lineno = 0;
    bool first = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            first = false;
            // header if the second column is not numeric
            if (cells.size() >= 2) {
                char* end = nullptr;
                std::strtod(cells[1].c_str(), &end);
                if (end == cells[1].c_str()) {
                    out.has_labels = cells.size() >= 3;
                    continue;
                }
            }
            out.has_labels = cells.size() >= 3;
        }
        if (cells.size() < 2 || cells.size() > 3)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected t,value[,label]");
        char* end = nullptr;
        double v = std::strtod(cells[1].c_str(), &end);
        if (end == cells[1].c_str() || *end != '\0')
            throw std::runtime_error("line " + std::to_string(lineno) + ": bad value '" +
                                     cells[1] + "'");
        bool has_label = cells.size() == 3;
        if (has_label != out.has_labels)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": inconsistent label column");
        out.values.push_back(v);
        if (has_label) {
            if (cells[2] != "0" && cells[2] != "1")
                throw std::runtime_error("line " + std::to_string(lineno) + ": bad label '" +
                                         cells[2] + "'");
            out.labels.push_back(cells[2] == "1" ? 1 : 0);
        }
    }
    return out;
}

}  // namespace streamfdr
