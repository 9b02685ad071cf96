#pragma once

// Plain-text stream files: one row per time step, comma-separated decimal
// floats, `nan` (any case) marks a missing entry, lines starting with '#'
// are comments. Writers emit 17 significant digits so values round-trip.

#include <filesystem>
#include <iosfwd>

#include "rankwatch/model.hpp"

namespace rankwatch {

Stream read_stream(std::istream& in);
Stream read_stream(const std::filesystem::path& path);

void write_stream(const Stream& stream, std::ostream& out, const std::string& header = {});
void write_stream(const Stream& stream, const std::filesystem::path& path,
                  const std::string& header = {});

/// Rows of a dense matrix in the same format (no missing entries allowed).
/// Used for sketch operators (row i = a_i) and direction banks.
Matrix read_matrix_rows(const std::filesystem::path& path);
void write_matrix_rows(const Matrix& rows, const std::filesystem::path& path,
                       const std::string& header = {});

/// Shortest-round-trip-safe decimal form of a double ("nan" for NaN).
std::string format_double(double v);

}  // namespace rankwatch
