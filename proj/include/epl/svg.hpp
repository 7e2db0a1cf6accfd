#pragma once

#include <filesystem>
#include <string>

#include "epl/common.hpp"

namespace epl {

struct ScatterStyle {
  double width = 640.0;
  double height = 640.0;
  double margin = 20.0;
  double radius = 3.0;
};

/// Fill colour for a class id; kUnlabeled is black.
std::string class_colour(Label label);

/// One circle per row of the n x 2 `coords`, coloured by `labels`, with the
/// bounding box mapped onto the canvas. Coordinates are printed with two
/// decimals so the output is byte-stable.
std::string render_scatter(const Matrix& coords, const LabelVector& labels, const ScatterStyle& style = {});

void emit_scatter(const Matrix& coords, const LabelVector& labels, const std::filesystem::path& path,
                  const ScatterStyle& style = {});

}  // namespace epl
