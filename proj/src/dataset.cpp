#include "admgaug/dataset.hpp"

#include "admgaug/admg.hpp"
#include "admgaug/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

namespace admgaug {

Dataset::Dataset(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), kinds_(names_.size(), VarKind::Continuous), values_(std::move(values)) {
    if (names_.empty()) throw Error(Errc::InvalidArgument, "dataset needs at least one column");
    if (values_.size() % names_.size() != 0) throw Error(Errc::DimensionMismatch, "values are not rectangular");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (names_[i] == names_[k]) throw Error(Errc::InvalidArgument, "duplicate column '" + names_[i] + "'");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite value in dataset");
    }
    rows_ = values_.size() / names_.size();
}

std::vector<double> Dataset::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
    return out;
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Dataset::column_index(std::string_view name) const {
    if (auto c = find_column(name)) return *c;
    throw Error(Errc::UnknownVertex, "no column named '" + std::string(name) + "'");
}

void Dataset::set_target(std::size_t c) {
    if (c >= cols()) throw Error(Errc::InvalidArgument, "target column out of range");
    target_ = c;
}

std::size_t Dataset::require_target() const {
    if (!target_) throw Error(Errc::InvalidArgument, "dataset has no target column");
    return *target_;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> values;
    values.reserve(indices.size() * cols());
    for (auto r : indices) {
        if (r >= rows_) throw Error(Errc::InvalidArgument, "row index out of range");
        const auto src = row(r);
        values.insert(values.end(), src.begin(), src.end());
    }
    Dataset out;
    out.names_ = names_;
    out.kinds_ = kinds_;
    out.values_ = std::move(values);
    out.rows_ = indices.size();
    out.target_ = target_;
    return out;
}

Dataset parse_csv(std::string_view content, const std::string& source_name) {
    std::vector<std::string> header;
    std::vector<double> values;
    std::size_t line_no = 0;
    std::size_t start = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(Errc::ParseError, source_name + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        auto line = text::trim(content.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (header.empty()) {
            header = text::split_list(line);
            for (const auto& h : header) {
                if (h.empty()) fail("empty column name");
            }
            continue;
        }
        const auto fields = text::split_list(line);
        if (fields.size() != header.size()) {
            fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        for (const auto& f : fields) {
            double v = 0.0;
            const auto* first = f.data();
            const auto* last = f.data() + f.size();
            if (!f.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (f.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
                fail("invalid number '" + f + "'");
            }
            values.push_back(v);
        }
    }
    if (header.empty()) throw Error(Errc::ParseError, source_name + ": missing header row");
    try {
        return Dataset(std::move(header), std::move(values));
    } catch (const Error& e) {
        throw Error(Errc::ParseError, source_name + ": " + e.what());
    }
}

Dataset read_csv(const std::string& path) { return parse_csv(text::read_file(path), path); }

std::string format_double(double value) {
    if (value == 0.0) value = 0.0;  // fold -0
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string format_csv(const Dataset& data) {
    std::string out;
    for (std::size_t c = 0; c < data.cols(); ++c) {
        if (c) out += ',';
        out += data.names()[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (c) out += ',';
            out += format_double(data.at(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoError, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(Errc::IoError, "write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot rename onto '" + path + "'");
    }
}

}  // namespace admgaug
