#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"

namespace alcurate {

// Dataset CSV format, exact:
//   header: instance_id,subject_id,label,f0,...,f{d-1}
//   rows:   one instance each, newline-terminated, UTF-8, no quoting.
// Subject ids are restricted to [A-Za-z0-9_-] so no escaping is ever needed.
// Floats are written with 17 significant digits, so save -> load is an
// identity.

namespace detail {

inline bool valid_subject_id(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
            return false;
    return true;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

}  // namespace detail

inline void save_csv(const Dataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << "instance_id,subject_id,label";
    for (std::size_t k = 0; k < ds.feature_dim; ++k) out << ",f" << k;
    out << "\n";
    char buf[64];
    for (const Instance& inst : ds.instances) {
        if (!detail::valid_subject_id(inst.subject))
            throw DataError("subject id '" + inst.subject +
                            "' contains characters outside [A-Za-z0-9_-]");
        out << inst.instance_id << ',' << inst.subject << ',' << inst.label;
        for (double f : inst.features) {
            std::snprintf(buf, sizeof(buf), "%.17g", f);
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw DataError("write failure on " + path);
}

inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path + " for reading");

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_csv_line(line);
    if (header.size() < 4 || header[0] != "instance_id" || header[1] != "subject_id" ||
        header[2] != "label")
        throw DataError(path + ": line 1: malformed header, expected "
                               "instance_id,subject_id,label,f0,...");
    const std::size_t dim = header.size() - 3;
    for (std::size_t k = 0; k < dim; ++k)
        if (header[3 + k] != "f" + std::to_string(k))
            throw DataError(path + ": line 1: feature column " + std::to_string(k) +
                            " must be named f" + std::to_string(k));

    Dataset ds;
    ds.feature_dim = dim;
    std::unordered_set<std::int64_t> seen_ids;
    std::unordered_map<SubjectId, ClassLabel> subject_label;
    ClassLabel max_label = -1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ": line " + std::to_string(line_no);
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3 + dim)
            throw DataError(where + ": expected " + std::to_string(3 + dim) + " fields, got " +
                            std::to_string(fields.size()));
        Instance inst;
        if (!detail::parse_number(fields[0], inst.instance_id))
            throw DataError(where + ": bad instance_id '" + fields[0] + "'");
        if (!detail::valid_subject_id(fields[1]))
            throw DataError(where + ": bad subject_id '" + fields[1] + "'");
        inst.subject = fields[1];
        if (!detail::parse_number(fields[2], inst.label) || inst.label < 0)
            throw DataError(where + ": bad label '" + fields[2] + "'");
        inst.features.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            if (!detail::parse_number(fields[3 + k], inst.features[k]) ||
                !std::isfinite(inst.features[k]))
                throw DataError(where + ": bad feature value '" + fields[3 + k] + "'");
        }
        if (!seen_ids.insert(inst.instance_id).second)
            throw DataError(where + ": duplicate instance_id " +
                            std::to_string(inst.instance_id));
        const auto [it, inserted] = subject_label.emplace(inst.subject, inst.label);
        if (!inserted && it->second != inst.label)
            throw DataError(where + ": subject " + inst.subject + " already has label " +
                            std::to_string(it->second) + ", now labeled " +
                            std::to_string(inst.label));
        max_label = std::max(max_label, inst.label);
        ds.instances.push_back(std::move(inst));
    }
    if (ds.instances.empty()) throw DataError(path + ": no data rows");
    ds.num_classes = max_label + 1;
    ds.validate();
    return ds;
}

}  // namespace alcurate
