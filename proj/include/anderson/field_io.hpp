#pragma once

#include <filesystem>

#include "anderson/field.hpp"

namespace anderson {

/// Writes `<stem>.f64` (little-endian doubles) and `<stem>.json`
/// ({d, n, L, space, kind, alpha, seed, epsilon}).
void write_field(const std::filesystem::path& stem, const Field& f);
Field read_field(const std::filesystem::path& stem);

}  // namespace anderson
