#pragma once

#include "mldl/common.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace mldl::svg {

/// 2-D scatter in a fixed 640x640 viewport. Points are colored by `color`
/// (one value per row, mapped through a blue-to-red ramp) or uniform gray
/// when absent.
void save_scatter_2d(const Matrix& points, const std::optional<Vector>& color,
                     const std::filesystem::path& path);

/// 3-D point set drawn as three orthographic projections (xy, xz, yz) side by
/// side.
void save_scatter_3d(const Matrix& points, const std::optional<Vector>& color,
                     const std::filesystem::path& path);

}  // namespace mldl::svg
