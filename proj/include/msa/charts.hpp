// Copyright 2026 The msa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Deterministic, self-contained SVG charts.

#include <filesystem>
#include <string>
#include <vector>

namespace msa::viz {

struct ScatterPoint {
  double x = 0.0, y = 0.0;
  int label = 0;
};

// Points coloured by label; the legend lists only labels that occur.
std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::vector<std::string>& class_names, const std::string& title);

struct Bar {
  std::string series;  // e.g. dataset or source
  double value = 0.0;
};

struct BarGroup {
  std::string name;  // e.g. modality subset
  std::vector<Bar> bars;
};

// One cluster of bars per group, one colour per series; values in [0, y_max].
std::string bars_svg(const std::vector<BarGroup>& groups, const std::string& title,
                     const std::string& y_label, double y_max = 1.0);

// Throws ValidationError when the path cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace msa::viz
