#ifndef ADMGAUG_DATASET_HPP
#define ADMGAUG_DATASET_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace admgaug {

enum class VarKind { Continuous, Discrete };

/// Rectangular n x D table of reals in row-major order. Discrete columns hold
/// integer-coded values and are compared for exact equality by the kernels.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> names, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return names_.size(); }

    double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double> column(std::size_t c) const;

    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<VarKind>& kinds() const noexcept { return kinds_; }
    bool is_discrete(std::size_t c) const { return kinds_[c] == VarKind::Discrete; }

    std::optional<std::size_t> find_column(std::string_view name) const;
    // Throws UnknownVertex naming the missing column.
    std::size_t column_index(std::string_view name) const;

    void set_kind(std::size_t c, VarKind kind) { kinds_.at(c) = kind; }
    void mark_discrete(std::string_view name) { set_kind(column_index(name), VarKind::Discrete); }

    std::optional<std::size_t> target() const noexcept { return target_; }
    void set_target(std::string_view name) { target_ = column_index(name); }
    void set_target(std::size_t c);
    // Throws InvalidArgument when no target is set.
    std::size_t require_target() const;

    /// Rows picked by index, metadata preserved.
    Dataset select_rows(std::span<const std::size_t> indices) const;

private:
    std::vector<std::string> names_;
    std::vector<VarKind> kinds_;
    std::vector<double> values_;
    std::size_t rows_ = 0;
    std::optional<std::size_t> target_;
};

/// Comma-separated, header row first, `.` decimal point, no quoting.
Dataset parse_csv(std::string_view content, const std::string& source_name = "<csv>");
Dataset read_csv(const std::string& path);
std::string format_csv(const Dataset& data);

/// Shortest form that still round-trips: 17 significant digits.
std::string format_double(double value);

/// Write to a sibling temporary file and rename over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace admgaug

#endif  // ADMGAUG_DATASET_HPP
