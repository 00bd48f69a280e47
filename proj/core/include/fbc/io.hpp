#pragma once

#include "fbc/classifiers.hpp"
#include "fbc/fd.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbc {

/// Contents of a curve CSV file.
///
/// The header row holds the m grid points followed by the literal `label`;
/// each data row holds m curve values and an integer label. The label column
/// may be absent for files that are only classified.
struct CurveFile {
    Grid grid;
    Matrix curves;
    std::optional<std::vector<int>> labels;

    /// Throws DataError if the file has no label column.
    [[nodiscard]] FunctionalDataset dataset() const;
};

/// Throws DataError with the offending line number on malformed input.
CurveFile read_curve_csv(std::istream& in, std::string_view source = "<input>");
CurveFile read_curve_csv(const std::filesystem::path& path);

void write_curve_csv(std::ostream& out, const Grid& grid, const Matrix& curves, const std::vector<int>* labels = nullptr);
void write_curve_csv(const std::filesystem::path& path, const FunctionalDataset& data);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);
/// Strict full-token parse; nullopt on trailing garbage, empty input or overflow.
std::optional<double> parse_double(std::string_view text);

/// Current model JSON format version; see docs/model-format.md.
inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const TrainedModel& model);
/// Throws DataError on malformed or unsupported documents.
TrainedModel deserialize_model(std::string_view json);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace fbc
